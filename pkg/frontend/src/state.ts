/** Session controller: holds the UI state and dispatches user intents to
 *  the API. Every transition waits for server confirmation; the view
 *  layer renders only what the latest API response offered. */

import {
  ApiClient,
  ApiConflictError,
  DatasetItem,
  ItemView,
  SessionView,
} from "./api";

export interface UiState {
  session: SessionView | null;
  items: DatasetItem[];
  position: number; // index into items[]
  view: ItemView | null;
  codeCounts: Record<string, number>;
  annotationExpanded: boolean;
  secondBranchPending: boolean;
  error: string | null;
  busy: boolean;
}

export type Listener = (state: UiState) => void;

const UNFOCUSED = "Unfocused";

export class SessionController {
  state: UiState = {
    session: null,
    items: [],
    position: 0,
    view: null,
    codeCounts: {},
    annotationExpanded: false,
    secondBranchPending: false,
    error: null,
    busy: false,
  };

  private listeners: Listener[] = [];

  constructor(private api: ApiClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  private patch(partial: Partial<UiState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  /** Serialize intents: optimistic UI is forbidden, so while one request
   *  is in flight all further intents are ignored. */
  private async transition(work: () => Promise<void>): Promise<void> {
    if (this.state.busy) return;
    this.patch({ busy: true, error: null });
    try {
      await work();
      this.patch({ busy: false });
    } catch (error) {
      const message =
        error instanceof ApiConflictError
          ? `Conflict: ${error.message}`
          : error instanceof Error
            ? error.message
            : String(error);
      this.patch({ busy: false, error: message });
      if (error instanceof ApiConflictError) {
        // re-sync with server truth after a rejected mutation
        await this.refreshView();
      }
    }
  }

  currentItemIndex(): number | null {
    const item = this.state.items[this.state.position];
    return item ? item.index : null;
  }

  async start(coderId: string): Promise<void> {
    await this.transition(async () => {
      const session = await this.api.createSession(coderId);
      const dataset = await this.api.getDataset();
      this.patch({ session, items: dataset.items, position: 0 });
      await this.loadCurrent();
    });
  }

  async resume(sessionId: string): Promise<void> {
    await this.transition(async () => {
      const session = await this.api.getSession(sessionId);
      const dataset = await this.api.getDataset();
      const position = session.next_item
        ? Math.max(0, dataset.items.findIndex((i) => i.index === session.next_item))
        : 0;
      this.patch({ session, items: dataset.items, position });
      await this.loadCurrent();
    });
  }

  private async refreshSession(): Promise<void> {
    if (!this.state.session) return;
    const session = await this.api.getSession(this.state.session.session_id);
    this.patch({ session });
  }

  private async refreshView(): Promise<void> {
    const index = this.currentItemIndex();
    if (index === null || !this.state.session) return;
    const view = await this.api.getItem(this.state.session.session_id, index);
    this.applyView(view);
  }

  private applyView(view: ItemView): void {
    const secondBranchPending =
      this.state.secondBranchPending && view.status === "in_progress";
    this.patch({ view, secondBranchPending });
  }

  private async loadCurrent(): Promise<void> {
    this.patch({ annotationExpanded: false, secondBranchPending: false });
    await this.refreshView();
  }

  can(action: string): boolean {
    return this.state.view?.actions.includes(action) ?? false;
  }

  async answer(answer: "yes" | "no" | "both"): Promise<void> {
    await this.transition(async () => {
      const index = this.currentItemIndex();
      const { session, view } = this.state;
      if (index === null || !session || !view?.question) return;
      if (!this.can(answer)) return; // the API did not offer this action
      const next = await this.api.answer(
        session.session_id,
        index,
        view.question.id,
        answer,
      );
      if (answer === "both") {
        this.patch({ secondBranchPending: next.status === "in_progress" });
      }
      this.applyView(next);
    });
  }

  async undo(): Promise<void> {
    await this.transition(async () => {
      const index = this.currentItemIndex();
      if (index === null || !this.state.session || !this.can("undo")) return;
      const wasFinalized = this.state.view?.status === "finalized";
      const codes = this.state.view?.codes ?? [];
      const next = await this.api.undo(this.state.session.session_id, index);
      if (wasFinalized) {
        this.dropCounts(codes);
        await this.refreshSession();
      }
      this.applyView(next);
    });
  }

  async finalize(): Promise<void> {
    await this.transition(async () => {
      const index = this.currentItemIndex();
      if (index === null || !this.state.session || !this.can("finalize")) return;
      const next = await this.api.finalize(this.state.session.session_id, index);
      this.addCounts(next.codes);
      await this.refreshSession();
      this.applyView(next);
    });
  }

  /** Toggle the Unfocused sub-label on the first M1 tag, if offered. */
  async toggleUnfocused(): Promise<void> {
    await this.transition(async () => {
      const index = this.currentItemIndex();
      const { session, view } = this.state;
      if (index === null || !session || !view || !this.can("sublabel")) return;
      const position = view.codes.indexOf("M1");
      if (position < 0) return;
      if (this.hasUnfocused()) return; // setting is idempotent; no unset op
      const next = await this.api.sublabel(
        session.session_id,
        index,
        position,
        UNFOCUSED,
      );
      this.applyView(next);
    });
  }

  hasUnfocused(): boolean {
    const { view } = this.state;
    if (!view) return false;
    const position = view.codes.indexOf("M1");
    return position >= 0 && (view.sublabels[String(position)] ?? []).includes(UNFOCUSED);
  }

  async goTo(position: number): Promise<void> {
    await this.transition(async () => {
      if (position < 0 || position >= this.state.items.length) return;
      this.patch({ position });
      await this.loadCurrent();
    });
  }

  async nextItem(): Promise<void> {
    await this.goTo(this.state.position + 1);
  }

  async previousItem(): Promise<void> {
    await this.goTo(this.state.position - 1);
  }

  /** Jump to the first item the server reports as not finalized. */
  async nextPending(): Promise<void> {
    await this.transition(async () => {
      await this.refreshSession();
      const next = this.state.session?.next_item;
      if (next == null) return;
      const position = this.state.items.findIndex((i) => i.index === next);
      if (position >= 0) {
        this.patch({ position });
        await this.loadCurrent();
      }
    });
  }

  toggleAnnotation(): void {
    this.patch({ annotationExpanded: !this.state.annotationExpanded });
  }

  async exportCsv(): Promise<{ text: string; incomplete: boolean }> {
    if (!this.state.session) throw new Error("no active session");
    await this.refreshSession();
    const { finalized, total } = this.state.session.progress;
    const text = await this.api.exportCsv(this.state.session.session_id);
    return { text, incomplete: finalized < total };
  }

  private addCounts(codes: string[]): void {
    const codeCounts = { ...this.state.codeCounts };
    for (const code of codes) {
      codeCounts[code] = (codeCounts[code] ?? 0) + 1;
    }
    this.patch({ codeCounts });
  }

  private dropCounts(codes: string[]): void {
    const codeCounts = { ...this.state.codeCounts };
    for (const code of codes) {
      codeCounts[code] = Math.max(0, (codeCounts[code] ?? 0) - 1);
    }
    this.patch({ codeCounts });
  }
}
