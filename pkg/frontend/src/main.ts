/**
 * Browser bootstrap: wires DOM events to store actions and re-renders the
 * three panels on every state change.
 */

import { ApiClient, MetamodelDoc } from "./api.js";
import { renderApp } from "./render.js";
import { BrowserStore } from "./store.js";

function mount(store: BrowserStore, root: HTMLElement): void {
  const rerender = () => {
    root.innerHTML = renderApp(store.state);
  };
  store.subscribe(rerender);
  rerender();

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const toggle = target.closest<HTMLElement>("[data-toggle]");
    if (toggle?.dataset.toggle) {
      store.toggleExpanded(toggle.dataset.toggle);
      return;
    }
    const select = target.closest<HTMLElement>("[data-select]");
    if (select?.dataset.select) {
      const fqn = select.dataset.select;
      const selection = (event as MouseEvent).shiftKey
        ? [...store.state.selection, fqn]
        : [fqn];
      void store.select(selection);
      return;
    }
    const op = target.closest<HTMLElement>("button[data-op]");
    if (op?.dataset.op) {
      store.chooseOperation(op.dataset.op);
      return;
    }
    if (target.closest("button[data-release]")) {
      void store.releaseNow();
      return;
    }
    if (target.closest("button[data-retry]")) {
      void store.refresh();
    }
  });

  root.addEventListener("input", (event) => {
    const input = event.target as HTMLInputElement;
    if (input.name && input.closest("form.parameters")) {
      store.setField(input.name, input.value);
    }
  });

  root.addEventListener("submit", (event) => {
    const form = event.target as HTMLElement;
    if (form.matches("form.parameters")) {
      event.preventDefault();
      void store.submit();
    }
  });
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  const launcher = document.getElementById("launcher");
  const docsInput = document.getElementById("metamodel-docs") as HTMLTextAreaElement;
  const urlInput = document.getElementById("service-url") as HTMLInputElement;
  const button = document.getElementById("create-session") as HTMLButtonElement;
  if (!root || !launcher || !docsInput || !urlInput || !button) return;

  button.addEventListener("click", async () => {
    try {
      const docs = JSON.parse(docsInput.value) as MetamodelDoc[];
      const api = new ApiClient(urlInput.value.replace(/\/$/, ""));
      const store = await BrowserStore.create(api, docs);
      launcher.hidden = true;
      root.hidden = false;
      mount(store, root);
    } catch (error) {
      const message = error instanceof Error ? error.message : String(error);
      document.getElementById("launch-error")!.textContent = message;
    }
  });
}

void boot();
