/**
 * The operation-browser flow against the live service: load the case
 * session, observe live applicability for enum vs string attributes, apply
 * an operation and watch the timeline grow.
 */

import fs from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient, MetamodelDoc } from "../src/api.js";
import { renderHistoryTimeline, renderOperationPanel } from "../src/render.js";
import { BrowserStore } from "../src/store.js";
import { SERVICE_URL } from "./launch-service.js";

const fixturesDir = path.resolve(
  path.dirname(fileURLToPath(import.meta.url)),
  "..",
  "..",
  "fixtures",
);

function fixture(name: string): MetamodelDoc {
  return JSON.parse(
    fs.readFileSync(path.join(fixturesDir, name), "utf-8"),
  ) as MetamodelDoc;
}

const caseDocs = () => [
  fixture("java.mm.json"),
  fixture("sm.mm.json"),
  fixture("demo.mm.json"),
];

describe("operation browser flow", () => {
  let api: ApiClient;

  beforeAll(() => {
    api = new ApiClient(SERVICE_URL);
  });

  it("loads the case session and shows both metamodel roots", async () => {
    const store = await BrowserStore.create(api, caseDocs());
    expect(Object.keys(store.state.metamodels)).toEqual([
      "java",
      "sm",
      "demo",
    ]);
    expect(store.state.history.open).toEqual([]);
  });

  it("enables enumToSubclasses for an enum-typed attribute", async () => {
    const store = await BrowserStore.create(api, caseDocs());
    await store.select(["demo.demo.Task.priority"]);
    const op = store.state.operations.find((o) => o.name === "enumToSubclasses");
    expect(op?.applicable).toBe(true);
    expect(op?.prefilled).toEqual({ attribute: "demo.demo.Task.priority" });
    const panel = renderOperationPanel(store.state);
    expect(panel).toContain('<button data-op="enumToSubclasses">');
  });

  it("disables enumToSubclasses for a string attribute, showing C1", async () => {
    const store = await BrowserStore.create(api, caseDocs());
    await store.select(["sm.sm.State.name"]);
    const op = store.state.operations.find((o) => o.name === "enumToSubclasses");
    expect(op?.applicable).toBe(false);
    expect(op?.messages).toEqual(["attribute must have an enumeration type"]);
    const panel = renderOperationPanel(store.state);
    expect(panel).toContain("attribute must have an enumeration type");
    expect(panel).toMatch(/<li class="op disabled"><button disabled>enumToSubclasses/);
  });

  it("applies the operation and the timeline grows by one", async () => {
    const store = await BrowserStore.create(api, caseDocs());
    await store.select(["demo.demo.Task.priority"]);
    store.chooseOperation("enumToSubclasses");
    expect(store.state.form["attribute"]).toBe("demo.demo.Task.priority");
    store.setField("class", "demo.demo.Task");
    const before = store.state.history.open.length;
    const ok = await store.submit();
    expect(ok).toBe(true);
    expect(store.state.history.open.length).toBe(before + 1);
    const timeline = renderHistoryTimeline(store.state);
    expect(timeline).toContain("enumToSubclasses(");
    // the adapted metamodel is reflected in the tree data
    const demo = store.state.metamodels["demo"]!;
    const names = demo.packages[0]!.classifiers.map((c) => c.name);
    expect(names).toContain("LOW");
    expect(names).toContain("HIGH");
  });

  it("keeps the timeline unchanged on a constraint failure", async () => {
    const store = await BrowserStore.create(api, caseDocs());
    await store.select(["sm.sm.State.name"]);
    store.chooseOperation("enumToSubclasses");
    store.setField("class", "sm.sm.State");
    store.setField("attribute", "sm.sm.State.name");
    const ok = await store.submit();
    expect(ok).toBe(false);
    expect(store.state.formMessages).toContain(
      "attribute must have an enumeration type",
    );
    expect(store.state.history.open.length).toBe(0);
  });

  it("reloads on a stale revision and allows a retry", async () => {
    const first = await BrowserStore.create(api, caseDocs());
    const second = await BrowserStore.open(api, first.state.sessionId);
    // the first store mutates; the second becomes stale
    await first.select(["demo.demo.Task"]);
    first.chooseOperation("rename");
    first.setField("newName", "Job");
    expect(await first.submit()).toBe(true);

    second.chooseOperation("rename");
    second.setField("element", "demo.demo.Job");
    second.setField("newName", "Chore");
    const staleResult = await second.submit();
    expect(staleResult).toBe(false);
    expect(second.state.revision).toBe(first.state.revision);
    expect(second.state.formMessages.join(" ")).toContain("reloaded");
    // after the reload the retry goes through
    expect(await second.submit()).toBe(true);
    expect(second.state.history.open.length).toBe(2);
  });

  it("discards operation responses for superseded selections", async () => {
    const store = await BrowserStore.create(api, caseDocs());
    const outdated = store.select(["sm.sm.State.name"]);
    const current = store.select(["demo.demo.Task.priority"]);
    await Promise.all([outdated, current]);
    const op = store.state.operations.find((o) => o.name === "enumToSubclasses");
    expect(store.state.selection).toEqual(["demo.demo.Task.priority"]);
    expect(op?.applicable).toBe(true);
  });

  it("releases the open changes into a sealed section", async () => {
    const store = await BrowserStore.create(api, caseDocs());
    await store.select(["demo.demo.Task"]);
    store.chooseOperation("rename");
    store.setField("newName", "Job");
    await store.submit();
    expect(await store.releaseNow()).toBe(true);
    expect(store.state.history.releases.length).toBe(1);
    expect(store.state.history.open).toEqual([]);
    const timeline = renderHistoryTimeline(store.state);
    expect(timeline).toContain("Release 1");
  });
});
