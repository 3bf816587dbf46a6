/**
 * Pure render tests: the markup is a function of the state alone.
 */

import { describe, expect, it } from "vitest";

import { HistoryView, OperationView } from "../src/api.js";
import {
  escapeHtml,
  renderHistoryTimeline,
  renderMetamodelTree,
  renderOperationPanel,
  renderParameterForm,
} from "../src/render.js";
import { BrowserState } from "../src/store.js";

function state(partial: Partial<BrowserState>): BrowserState {
  return {
    sessionId: "s",
    revision: 0,
    metamodels: {},
    expanded: new Set<string>(),
    selection: [],
    operations: [],
    selectedOperation: null,
    form: {},
    formMessages: [],
    history: { releases: [], open: [], revision: 0 },
    pending: false,
    error: null,
    ...partial,
  };
}

const sampleOps: OperationView[] = [
  {
    name: "rename",
    parameters: [
      { name: "element", type: "element-ref" },
      { name: "newName", type: "string" },
    ],
    prefilled: { element: "m.p.A" },
    applicable: true,
    messages: [],
  },
  {
    name: "enumToSubclasses",
    parameters: [
      { name: "class", type: "class-ref" },
      { name: "attribute", type: "feature-ref" },
    ],
    prefilled: {},
    applicable: false,
    messages: ["attribute must have an enumeration type"],
  },
];

describe("metamodel tree", () => {
  const metamodels = {
    m: {
      name: "m",
      packages: [
        {
          name: "p",
          classifiers: [
            {
              kind: "class" as const,
              name: "A",
              abstract: false,
              super: [],
              features: [
                {
                  kind: "attribute" as const,
                  name: "x",
                  type: "string",
                  lower: 0,
                  upper: 1 as const,
                },
              ],
            },
          ],
        },
      ],
    },
  };

  it("shows roots collapsed by default", () => {
    const html = renderMetamodelTree(state({ metamodels }));
    expect(html).toContain('data-select="m"');
    expect(html).not.toContain('data-select="m.p"');
  });

  it("expands along the expanded set and marks the selection", () => {
    const html = renderMetamodelTree(
      state({
        metamodels,
        expanded: new Set(["m", "m.p", "m.p.A"]),
        selection: ["m.p.A.x"],
      }),
    );
    expect(html).toContain('data-select="m.p.A.x"');
    expect(html).toContain('class="node selected"');
    expect(html).toContain("x: string");
  });

  it("renders an empty metamodel as a childless root", () => {
    const html = renderMetamodelTree(
      state({
        metamodels: { e: { name: "e", packages: [] } },
        expanded: new Set(["e"]),
      }),
    );
    expect(html).toContain('data-select="e"');
    expect(html).not.toContain("<ul></ul>");
  });
});

describe("operation panel", () => {
  it("prompts while nothing is selected", () => {
    expect(renderOperationPanel(state({}))).toContain("Select a metamodel element");
  });

  it("enables applicable rows and disables failing ones with messages", () => {
    const html = renderOperationPanel(state({ operations: sampleOps }));
    expect(html).toContain('<button data-op="rename">');
    expect(html).toMatch(/<li class="op disabled"><button disabled>enumToSubclasses/);
    expect(html).toContain("attribute must have an enumeration type");
  });

  it("renders the parameter form from the signature", () => {
    const s = state({
      operations: sampleOps,
      selectedOperation: "rename",
      form: { element: "m.p.A", newName: "" },
    });
    const html = renderParameterForm(s);
    expect(html).toContain('name="element"');
    expect(html).toContain('value="m.p.A"');
    expect(html).toContain('name="newName"');
  });
});

describe("history timeline", () => {
  const history: HistoryView = {
    releases: [
      [
        {
          kind: "operation",
          label: "createReference(class=sm.sm.State)",
          opName: "createReference",
          bindings: {},
          migrationId: null,
          primitiveCount: 0,
        },
        {
          kind: "custom",
          label: "ExtractStates",
          opName: null,
          bindings: null,
          migrationId: "ExtractStates",
          primitiveCount: 0,
        },
      ],
    ],
    open: [],
    revision: 2,
  };

  it("renders releases as sections and labels custom records by migration id", () => {
    const html = renderHistoryTimeline(state({ history }));
    expect(html).toContain("Release 1");
    expect(html).toContain("ExtractStates");
    expect(html).toContain("createReference(class=sm.sm.State)");
  });

  it("disables the release button while the open release is empty", () => {
    const html = renderHistoryTimeline(state({ history }));
    expect(html).toContain("<button data-release disabled>");
  });

  it("escapes markup in labels", () => {
    expect(escapeHtml("<b>&x")).toBe("&lt;b&gt;&amp;x");
    const evil = state({
      history: {
        releases: [],
        open: [
          {
            kind: "custom",
            label: "<script>alert(1)</script>",
            primitiveCount: 0,
          },
        ],
        revision: 1,
      },
    });
    expect(renderHistoryTimeline(evil)).not.toContain("<script>");
  });
});
