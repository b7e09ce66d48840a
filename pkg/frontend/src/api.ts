/** Typed client for the codingtree HTTP API. The UI talks to the server
 *  exclusively through this module; it contains no tree logic. */

export interface QuestionView {
  id: string;
  text: string;
  annotation: string;
}

export interface ItemView {
  item_index: number;
  text: string;
  category: string | null;
  status: "pending" | "in_progress" | "coded" | "finalized";
  codes: string[];
  sublabels: Record<string, string[]>;
  iot_specific: boolean;
  actions: string[];
  question: QuestionView | null;
}

export interface SessionView {
  session_id: string;
  coder_id: string;
  progress: { finalized: number; total: number };
  next_item: number | null;
  tree_hash: string;
}

export interface DatasetItem {
  index: number;
  text: string;
  category: string | null;
}

export class ApiConflictError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "ApiConflictError";
  }
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function request<T>(
  base: string,
  path: string,
  init?: RequestInit,
): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (response.status === 409) {
    const body = await response.json().catch(() => ({ detail: "conflict" }));
    throw new ApiConflictError(String(body.detail ?? "conflict"));
  }
  if (!response.ok) {
    const body = await response.json().catch(() => ({ detail: response.statusText }));
    throw new ApiError(response.status, String(body.detail ?? response.statusText));
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(public base: string) {}

  createSession(coderId: string): Promise<SessionView> {
    return request(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify({ coder_id: coderId }),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return request(this.base, `/sessions/${sessionId}`);
  }

  getDataset(): Promise<{ items: DatasetItem[] }> {
    return request(this.base, "/dataset");
  }

  getItem(sessionId: string, itemIndex: number): Promise<ItemView> {
    return request(this.base, `/sessions/${sessionId}/items/${itemIndex}`);
  }

  answer(
    sessionId: string,
    itemIndex: number,
    question: string,
    answer: "yes" | "no" | "both",
  ): Promise<ItemView> {
    return request(this.base, `/sessions/${sessionId}/items/${itemIndex}/answer`, {
      method: "POST",
      body: JSON.stringify({ question, answer }),
    });
  }

  sublabel(
    sessionId: string,
    itemIndex: number,
    tagPosition: number,
    label: string,
  ): Promise<ItemView> {
    return request(this.base, `/sessions/${sessionId}/items/${itemIndex}/sublabel`, {
      method: "POST",
      body: JSON.stringify({ tag_position: tagPosition, label }),
    });
  }

  undo(sessionId: string, itemIndex: number): Promise<ItemView> {
    return request(this.base, `/sessions/${sessionId}/items/${itemIndex}/undo`, {
      method: "POST",
    });
  }

  finalize(sessionId: string, itemIndex: number): Promise<ItemView> {
    return request(this.base, `/sessions/${sessionId}/items/${itemIndex}/finalize`, {
      method: "POST",
    });
  }

  async exportCsv(sessionId: string): Promise<string> {
    const response = await fetch(`${this.base}/sessions/${sessionId}/export`);
    if (!response.ok) {
      throw new ApiError(response.status, response.statusText);
    }
    return await response.text();
  }
}
