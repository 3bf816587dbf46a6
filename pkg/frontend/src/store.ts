/**
 * Browser state and the actions that drive it.
 *
 * Two invariants are load-bearing: the operation list always reflects the
 * latest selection (responses for an older selection are discarded), and at
 * most one mutation is in flight at a time.  All state transitions go
 * through this store; rendering is a pure function of the state elsewhere.
 */

import {
  ApiClient,
  HistoryView,
  MetamodelDoc,
  OperationView,
  ServiceError,
} from "./api.js";

export interface BrowserState {
  sessionId: string;
  revision: number;
  metamodels: Record<string, MetamodelDoc>;
  expanded: Set<string>;
  selection: string[];
  operations: OperationView[];
  selectedOperation: string | null;
  form: Record<string, string>;
  formMessages: string[];
  history: HistoryView;
  pending: boolean;
  error: string | null;
}

type Listener = (state: BrowserState) => void;

export class BrowserStore {
  state: BrowserState;
  private listeners: Listener[] = [];
  private selectionEpoch = 0;

  constructor(
    private api: ApiClient,
    sessionId: string,
  ) {
    this.state = {
      sessionId,
      revision: 0,
      metamodels: {},
      expanded: new Set(),
      selection: [],
      operations: [],
      selectedOperation: null,
      form: {},
      formMessages: [],
      history: { releases: [], open: [], revision: 0 },
      pending: false,
      error: null,
    };
  }

  static async create(
    api: ApiClient,
    metamodels: MetamodelDoc[],
  ): Promise<BrowserStore> {
    const created = await api.createSession({ metamodels });
    const store = new BrowserStore(api, created.id);
    store.state.revision = created.revision;
    await store.refresh();
    return store;
  }

  static async open(api: ApiClient, sessionId: string): Promise<BrowserStore> {
    const store = new BrowserStore(api, sessionId);
    await store.refresh();
    return store;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private patch(partial: Partial<BrowserState>): void {
    this.state = { ...this.state, ...partial };
    this.notify();
  }

  async refresh(): Promise<void> {
    const sessionId = this.state.sessionId;
    let selection = this.state.selection;
    let operations;
    try {
      operations = await this.api.getOperations(sessionId, selection);
    } catch (error) {
      if (!(error instanceof ServiceError && error.status === 400)) throw error;
      // the selected elements no longer exist after the last adaptation
      selection = [];
      operations = await this.api.getOperations(sessionId, selection);
    }
    const [metamodels, history] = await Promise.all([
      this.api.getMetamodels(sessionId),
      this.api.getHistory(sessionId),
    ]);
    this.patch({
      metamodels: metamodels.metamodels,
      selection,
      operations: operations.operations,
      history,
      revision: history.revision,
      error: null,
    });
  }

  toggleExpanded(node: string): void {
    const expanded = new Set(this.state.expanded);
    if (expanded.has(node)) expanded.delete(node);
    else expanded.add(node);
    this.patch({ expanded });
  }

  /** Select metamodel elements; refreshes applicability for the newest pick. */
  async select(fqns: string[]): Promise<void> {
    const epoch = ++this.selectionEpoch;
    this.patch({ selection: fqns, selectedOperation: null, form: {}, formMessages: [] });
    const response = await this.api.getOperations(this.state.sessionId, fqns);
    if (epoch !== this.selectionEpoch) {
      return; // a newer selection answered already; drop this response
    }
    this.patch({ operations: response.operations });
  }

  chooseOperation(name: string): void {
    const op = this.state.operations.find((o) => o.name === name);
    if (op === undefined) return;
    const form: Record<string, string> = {};
    for (const parameter of op.parameters) {
      const prefilled = op.prefilled[parameter.name];
      form[parameter.name] = prefilled === undefined ? "" : String(prefilled);
    }
    this.patch({ selectedOperation: name, form, formMessages: [] });
  }

  setField(name: string, value: string): void {
    this.patch({ form: { ...this.state.form, [name]: value }, formMessages: [] });
  }

  /** Apply the chosen operation; exactly one mutation may be in flight. */
  async submit(): Promise<boolean> {
    const opName = this.state.selectedOperation;
    if (opName === null || this.state.pending) return false;
    const op = this.state.operations.find((o) => o.name === opName);
    const bindings: Record<string, unknown> = {};
    for (const [key, raw] of Object.entries(this.state.form)) {
      if (raw === "") continue;
      const type = op?.parameters.find((p) => p.name === key)?.type;
      bindings[key] = type === "boolean" ? raw === "true" : raw;
    }
    this.patch({ pending: true });
    try {
      await this.api.applyOperation(
        this.state.sessionId,
        opName,
        bindings,
        this.state.revision,
      );
      this.patch({ pending: false, selectedOperation: null, form: {} });
      await this.refresh();
      return true;
    } catch (error) {
      if (error instanceof ServiceError && error.status === 422) {
        // constraint failure: show messages inline, timeline untouched
        this.patch({ pending: false, formMessages: error.messages });
        return false;
      }
      if (error instanceof ServiceError && error.status === 409) {
        // stale revision: reload the session state, keep the form for retry
        const form = this.state.form;
        const selectedOperation = this.state.selectedOperation;
        this.patch({ pending: false });
        await this.refresh();
        this.patch({
          selectedOperation,
          form,
          formMessages: ["session changed elsewhere; state reloaded, please retry"],
        });
        return false;
      }
      this.patch({
        pending: false,
        error: error instanceof Error ? error.message : String(error),
      });
      return false;
    }
  }

  async releaseNow(force = false): Promise<boolean> {
    if (this.state.pending) return false;
    this.patch({ pending: true });
    try {
      await this.api.release(this.state.sessionId, this.state.revision, force);
      this.patch({ pending: false });
      await this.refresh();
      return true;
    } catch (error) {
      const messages =
        error instanceof ServiceError ? error.messages : [String(error)];
      this.patch({ pending: false, error: messages.join("; ") });
      if (error instanceof ServiceError && error.status === 409) {
        await this.refresh();
      }
      return false;
    }
  }
}
