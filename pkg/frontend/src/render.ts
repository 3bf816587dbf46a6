/**
 * Pure HTML renderers: each view is a function of the browser state only,
 * so replaying the same response sequence reproduces the same markup.
 */

import { ClassifierDoc, MetamodelDoc, RecordView } from "./api.js";
import { BrowserState } from "./store.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function treeNode(
  state: BrowserState,
  fqn: string,
  label: string,
  children: string,
): string {
  const expanded = state.expanded.has(fqn);
  const selected = state.selection.includes(fqn) ? " selected" : "";
  const toggle = children
    ? `<span class="toggle" data-toggle="${escapeHtml(fqn)}">${expanded ? "▾" : "▸"}</span>`
    : `<span class="toggle leaf"></span>`;
  const body = expanded && children ? `<ul>${children}</ul>` : "";
  return (
    `<li>${toggle}<span class="node${selected}" data-select="${escapeHtml(fqn)}">` +
    `${escapeHtml(label)}</span>${body}</li>`
  );
}

function classifierNode(
  state: BrowserState,
  packageFqn: string,
  classifier: ClassifierDoc,
): string {
  const fqn = `${packageFqn}.${classifier.name}`;
  if (classifier.kind === "enum") {
    const literals = (classifier.literals ?? [])
      .map((l) => `<li><span class="literal">${escapeHtml(l)}</span></li>`)
      .join("");
    return treeNode(state, fqn, `${classifier.name} «enum»`, literals);
  }
  const features = (classifier.features ?? [])
    .map((feature) => {
      const detail =
        feature.kind === "attribute"
          ? `: ${feature.type}`
          : ` → ${feature.target}`;
      return treeNode(state, `${fqn}.${feature.name}`, feature.name + detail, "");
    })
    .join("");
  const marker = classifier.abstract ? " «abstract»" : "";
  return treeNode(state, fqn, classifier.name + marker, features);
}

export function renderMetamodelTree(state: BrowserState): string {
  const roots = Object.values(state.metamodels)
    .map((metamodel: MetamodelDoc) => {
      const packages = metamodel.packages
        .map((pkg) => {
          const packageFqn = `${metamodel.name}.${pkg.name}`;
          const classifiers = pkg.classifiers
            .map((c) => classifierNode(state, packageFqn, c))
            .join("");
          return treeNode(state, packageFqn, pkg.name, classifiers);
        })
        .join("");
      return treeNode(state, metamodel.name, metamodel.name, packages);
    })
    .join("");
  return `<ul class="metamodel-tree">${roots}</ul>`;
}

export function renderOperationPanel(state: BrowserState): string {
  if (state.selection.length === 0 && state.operations.length === 0) {
    return `<p class="hint">Select a metamodel element to see applicable operations.</p>`;
  }
  const rows = state.operations
    .map((op) => {
      if (op.applicable) {
        return (
          `<li class="op applicable"><button data-op="${escapeHtml(op.name)}">` +
          `${escapeHtml(op.name)}</button></li>`
        );
      }
      const messages = op.messages
        .map((m) => `<li class="constraint">${escapeHtml(m)}</li>`)
        .join("");
      return (
        `<li class="op disabled"><button disabled>${escapeHtml(op.name)}</button>` +
        `<ul class="messages">${messages}</ul></li>`
      );
    })
    .join("");
  return `<ul class="operations">${rows}</ul>`;
}

export function renderParameterForm(state: BrowserState): string {
  const opName = state.selectedOperation;
  const op = state.operations.find((o) => o.name === opName);
  if (opName === null || op === undefined) return "";
  const fields = op.parameters
    .map((parameter) => {
      const value = state.form[parameter.name] ?? "";
      return (
        `<label>${escapeHtml(parameter.name)} <small>(${parameter.type})</small>` +
        `<input name="${escapeHtml(parameter.name)}" value="${escapeHtml(value)}"></label>`
      );
    })
    .join("");
  const messages = state.formMessages
    .map((m) => `<li class="constraint">${escapeHtml(m)}</li>`)
    .join("");
  const disabled = state.pending ? " disabled" : "";
  return (
    `<form class="parameters" data-op="${escapeHtml(opName)}">` +
    `<h3>${escapeHtml(opName)}</h3>${fields}` +
    (messages ? `<ul class="messages">${messages}</ul>` : "") +
    `<button type="submit"${disabled}>Apply</button></form>`
  );
}

function recordEntry(record: RecordView): string {
  const badge = record.kind === "operation" ? "op" : "custom";
  return (
    `<li class="record ${badge}"><span class="badge">${badge}</span> ` +
    `${escapeHtml(record.label)}</li>`
  );
}

export function renderHistoryTimeline(state: BrowserState): string {
  const sealed = state.history.releases
    .map((records, index) => {
      const entries = records.map(recordEntry).join("");
      return (
        `<section class="release sealed"><h4>Release ${index + 1}</h4>` +
        `<ol>${entries}</ol></section>`
      );
    })
    .join("");
  const openEntries = state.history.open.map(recordEntry).join("");
  const disabled = state.pending || state.history.open.length === 0;
  return (
    `<div class="timeline">${sealed}` +
    `<section class="release open"><h4>Open changes</h4><ol>${openEntries}</ol>` +
    `<button data-release${disabled ? " disabled" : ""}>Release</button>` +
    `</section></div>`
  );
}

export function renderApp(state: BrowserState): string {
  const error = state.error
    ? `<div class="banner error">${escapeHtml(state.error)} ` +
      `<button data-retry>Retry</button></div>`
    : "";
  return (
    `${error}<div class="columns">` +
    `<div class="column tree">${renderMetamodelTree(state)}</div>` +
    `<div class="column ops">${renderOperationPanel(state)}${renderParameterForm(state)}</div>` +
    `<div class="column history">${renderHistoryTimeline(state)}</div>` +
    `</div>`
  );
}
