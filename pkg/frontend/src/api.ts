/**
 * Typed client for the operation browser service endpoints.
 */

export interface FeatureDoc {
  kind: "attribute" | "reference";
  name: string;
  type?: string;
  target?: string;
  containment?: boolean;
  lower: number;
  upper: number | "*";
}

export interface ClassifierDoc {
  kind: "class" | "enum";
  name: string;
  abstract?: boolean;
  super?: string[];
  features?: FeatureDoc[];
  literals?: string[];
}

export interface MetamodelDoc {
  name: string;
  packages: { name: string; classifiers: ClassifierDoc[] }[];
}

export interface ParameterView {
  name: string;
  type: string;
}

export interface OperationView {
  name: string;
  parameters: ParameterView[];
  prefilled: Record<string, unknown>;
  applicable: boolean;
  messages: string[];
}

export interface RecordView {
  kind: "operation" | "custom";
  label: string;
  opName?: string | null;
  bindings?: Record<string, unknown> | null;
  migrationId?: string | null;
  primitiveCount: number;
}

export interface HistoryView {
  releases: RecordView[][];
  open: RecordView[];
  revision: number;
}

export class ServiceError extends Error {
  constructor(
    public status: number,
    public code: string,
    public messages: string[],
  ) {
    super(messages.join("; ") || code);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  const body = await response.json();
  if (!response.ok) {
    throw new ServiceError(
      response.status,
      body.code ?? "error",
      body.messages ?? [JSON.stringify(body)],
    );
  }
  return body as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  createSession(body: {
    metamodels?: MetamodelDoc[];
    models?: unknown[];
    history?: unknown;
  }): Promise<{ id: string; revision: number }> {
    return request(this.url("/sessions"), {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getMetamodels(sessionId: string): Promise<{
    metamodels: Record<string, MetamodelDoc>;
    revision: number;
  }> {
    return request(this.url(`/sessions/${sessionId}/metamodels`));
  }

  getOperations(
    sessionId: string,
    selection: string[],
  ): Promise<{ operations: OperationView[]; revision: number }> {
    const query = selection.length
      ? `?selection=${encodeURIComponent(selection.join(","))}`
      : "";
    return request(this.url(`/sessions/${sessionId}/operations${query}`));
  }

  applyOperation(
    sessionId: string,
    opName: string,
    bindings: Record<string, unknown>,
    revision: number,
  ): Promise<{ record: unknown; revision: number }> {
    return request(this.url(`/sessions/${sessionId}/operations/${opName}`), {
      method: "POST",
      body: JSON.stringify({ bindings, revision }),
    });
  }

  release(
    sessionId: string,
    revision: number,
    force = false,
  ): Promise<{ revision: number }> {
    return request(this.url(`/sessions/${sessionId}/release`), {
      method: "POST",
      body: JSON.stringify({ revision, force }),
    });
  }

  getHistory(sessionId: string): Promise<HistoryView> {
    return request(this.url(`/sessions/${sessionId}/history`));
  }
}
