/** DOM rendering: a pure projection of UiState into a container element. */

import { UiState } from "./state";

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function button(
  label: string,
  key: string,
  action: string,
  enabled: boolean,
): HTMLButtonElement {
  const node = document.createElement("button");
  node.className = `action action-${action}`;
  node.dataset.action = action;
  node.disabled = !enabled;
  node.textContent = `${label} (${key})`;
  return node;
}

export function render(container: HTMLElement, state: UiState): void {
  container.textContent = "";
  if (!state.session) {
    container.append(el("p", "placeholder", "No active session."));
    return;
  }

  // progress bar + per-code running counts
  const { finalized, total } = state.session.progress;
  const header = el("header", "progress");
  const bar = el("div", "progress-bar");
  const fill = el("div", "progress-fill");
  fill.style.width = total ? `${(100 * finalized) / total}%` : "0%";
  bar.append(fill);
  header.append(bar, el("span", "progress-text", `${finalized}/${total}`));
  const counts = el("ul", "code-counts");
  for (const code of Object.keys(state.codeCounts).sort()) {
    if (state.codeCounts[code] > 0) {
      counts.append(el("li", "code-count", `${code}: ${state.codeCounts[code]}`));
    }
  }
  header.append(counts);
  container.append(header);

  if (state.error) {
    container.append(el("div", "error-banner", state.error));
  }
  if (state.secondBranchPending) {
    container.append(el("div", "branch-banner", "second branch pending"));
  }

  const view = state.view;
  if (!view) {
    container.append(el("p", "placeholder", "Loading item…"));
    return;
  }

  const itemCard = el("section", "item-card");
  itemCard.append(
    el(
      "h2",
      "item-title",
      `Item ${view.item_index}${view.category ? ` — ${view.category}` : ""}`,
    ),
    el("p", "item-text", view.text),
  );
  container.append(itemCard);

  if (view.question) {
    const questionCard = el("section", "question-card");
    questionCard.append(
      el("h3", "question-text", `${view.question.id}: ${view.question.text}`),
    );
    if (view.question.annotation) {
      if (state.annotationExpanded) {
        questionCard.append(
          el("p", "annotation annotation-open", view.question.annotation),
        );
      } else {
        questionCard.append(
          el("p", "annotation annotation-closed", "annotation — press A to expand"),
        );
      }
    }
    const actions = el("div", "actions");
    actions.append(
      button("Yes", "Y", "yes", view.actions.includes("yes")),
      button("No", "N", "no", view.actions.includes("no")),
      button("Both", "B", "both", view.actions.includes("both")),
      button("Undo", "U", "undo", view.actions.includes("undo")),
    );
    questionCard.append(actions);
    container.append(questionCard);
  } else {
    // code card: coded or finalized
    const codeCard = el(
      "section",
      view.status === "finalized" ? "code-card finalized" : "code-card",
    );
    codeCard.append(el("h3", "code-status", view.status));
    const codes = el("ul", "codes");
    for (const code of view.codes) {
      codes.append(el("li", "code", code));
    }
    codeCard.append(codes);
    if (view.actions.includes("sublabel")) {
      const label = el("label", "unfocused-toggle");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.dataset.action = "sublabel";
      const position = view.codes.indexOf("M1");
      box.checked =
        position >= 0 &&
        (view.sublabels[String(position)] ?? []).includes("Unfocused");
      box.disabled = box.checked; // applying is idempotent; there is no unset
      label.append(box, document.createTextNode(" Unfocused (X)"));
      codeCard.append(label);
    }
    const actions = el("div", "actions");
    if (view.actions.includes("finalize")) {
      actions.append(button("Finalize", "F", "finalize", true));
    }
    if (view.actions.includes("undo")) {
      actions.append(button("Undo", "U", "undo", true));
    }
    codeCard.append(actions);
    container.append(codeCard);
  }

  const footer = el("footer", "nav-help");
  footer.append(
    el(
      "span",
      "keys",
      "Y yes · N no · B both · U undo · F finalize · X unfocused · A annotation · ←/→ items · G next pending · E export",
    ),
  );
  container.append(footer);
}
