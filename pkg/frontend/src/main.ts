/** Bootstrap: wire the controller, renderer, keyboard map, and clicks. */

import { ApiClient } from "./api";
import { SessionController } from "./state";
import { render } from "./ui";

export function downloadCsv(filename: string, text: string): void {
  const blob = new Blob([text], { type: "text/csv" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}

export function bindKeyboard(
  controller: SessionController,
  target: Window | HTMLElement,
  onExport: () => void,
): void {
  target.addEventListener("keydown", (event: Event) => {
    const key = (event as KeyboardEvent).key;
    switch (key.toLowerCase()) {
      case "y":
        void controller.answer("yes");
        break;
      case "n":
        void controller.answer("no");
        break;
      case "b":
        void controller.answer("both");
        break;
      case "u":
        void controller.undo();
        break;
      case "f":
        void controller.finalize();
        break;
      case "x":
        void controller.toggleUnfocused();
        break;
      case "a":
        controller.toggleAnnotation();
        break;
      case "arrowright":
        void controller.nextItem();
        break;
      case "arrowleft":
        void controller.previousItem();
        break;
      case "g":
        void controller.nextPending();
        break;
      case "e":
        onExport();
        break;
    }
  });
}

export function bindClicks(
  controller: SessionController,
  container: HTMLElement,
): void {
  container.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const action = target.dataset?.action;
    if (!action) return;
    switch (action) {
      case "yes":
      case "no":
      case "both":
        void controller.answer(action);
        break;
      case "undo":
        void controller.undo();
        break;
      case "finalize":
        void controller.finalize();
        break;
      case "sublabel":
        void controller.toggleUnfocused();
        break;
    }
  });
}

export async function boot(
  container: HTMLElement,
  base: string,
  coderId: string,
): Promise<SessionController> {
  const controller = new SessionController(new ApiClient(base));
  controller.subscribe((state) => render(container, state));
  bindClicks(controller, container);
  bindKeyboard(controller, window, () => {
    void controller.exportCsv().then(({ text, incomplete }) => {
      const name = incomplete ? "session-incomplete.csv" : "session.csv";
      downloadCsv(name, text);
    });
  });
  await controller.start(coderId);
  return controller;
}

declare global {
  interface Window {
    codingtreeBoot?: typeof boot;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8400";
  const coder = params.get("coder") ?? "coder";
  void boot(document.getElementById("app") as HTMLElement, base, coder);
}

if (typeof window !== "undefined") {
  window.codingtreeBoot = boot;
}
