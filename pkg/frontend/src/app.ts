// Single-page client with three tabs: Explore, Dashboard, Export Data.
//
// State discipline: every mutation goes to the service first, and the view
// is rebuilt only from what the service confirmed (a fresh enlist after an
// annotation change, a fresh dashboard list after an item change). There are
// no optimistic updates anywhere; a slow request just means the old state
// stays on screen a moment longer.

import { ApiClient, ApiError } from "./api.js";
import {
  buildQuery,
  newExploreState,
  selectionProblem,
  type ExploreState,
  type FilterDraft,
} from "./query-builder.js";
import { findAll, h, mount, renderChart, withHandlers, type VNode } from "./charts.js";
import { renderThread } from "./threads.js";
import type {
  AnnotationInfo,
  AnnotationKind,
  ChartType,
  CubeMembers,
  DashboardItemInfo,
  QueryDocument,
  SessionInfo,
  TargetSpec,
} from "./types.js";

type Tab = "explore" | "dashboard" | "export";

interface SessionDraft {
  name: string;
  mbox: string;
  label: string;
}

interface EditDraft {
  annotationId: string;
  body: string;
}

export interface AppState {
  tab: Tab;
  members: CubeMembers | null;
  explore: ExploreState;
  lastQuery: QueryDocument | null;
  inlineMessage: string | null;
  banner: string | null;
  session: SessionInfo | null;
  sessionDraft: SessionDraft;
  actingPersonId: string | null;
  commentKind: AnnotationKind;
  replyTo: string | null;
  editDraft: EditDraft | null;
  exploreThread: AnnotationInfo[] | null;
  dashboard: DashboardItemInfo[];
  itemThreads: Record<string, AnnotationInfo[]>;
  itemCommentDrafts: Record<string, string>;
  itemTitleDrafts: Record<string, string>;
  titleDraft: string;
  importDraft: string;
  exportPreview: { text: string; filename: string | null } | null;
  lastImport: string[] | null;
}

export class App {
  readonly client: ApiClient;
  state: AppState;
  private root: HTMLElement | null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(client: ApiClient, root: HTMLElement | null = null) {
    this.client = client;
    this.root = root;
    this.state = {
      tab: "explore",
      members: null,
      explore: newExploreState(""),
      lastQuery: null,
      inlineMessage: null,
      banner: null,
      session: null,
      sessionDraft: { name: "", mbox: "", label: "analysis desk" },
      actingPersonId: null,
      commentKind: "comment",
      replyTo: null,
      editDraft: null,
      exploreThread: null,
      dashboard: [],
      itemThreads: {},
      itemCommentDrafts: {},
      itemTitleDrafts: {},
      titleDraft: "",
      importDraft: "",
      exportPreview: null,
      lastImport: null,
    };
  }

  async init(): Promise<void> {
    const listing = await this.client.listCubes();
    const first = listing.cubes[0];
    if (first) {
      this.state.members = await this.client.cubeMembers(first.name);
      this.state.explore = newExploreState(first.name);
    }
    this.state.dashboard = await this.client.listDashboard();
    this.refreshView();
  }

  startPolling(intervalMs = 5000): void {
    this.stopPolling();
    this.pollTimer = setInterval(() => {
      void this.poll();
    }, intervalMs);
  }

  stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  // One poll round: pull the dashboard and any thread that is on screen.
  async poll(): Promise<void> {
    try {
      this.state.dashboard = await this.client.listDashboard();
      if (this.state.session !== null) {
        this.state.session = await this.client.session(this.state.session.sessionId);
      }
      if (this.state.exploreThread !== null) {
        this.state.exploreThread = await this.client.enlistAnnotations(this.exploreTarget());
      }
      for (const itemId of Object.keys(this.state.itemThreads)) {
        this.state.itemThreads[itemId] = await this.client.enlistAnnotations({
          kind: "dashboardItem",
          itemId,
        });
      }
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  private reportError(error: unknown): void {
    if (error instanceof ApiError) {
      let message = `${error.error}: ${error.message}`;
      if (error.status === 409) {
        message += " (the session is closed; open a new one to keep annotating)";
      }
      this.state.banner = message;
    } else {
      this.state.banner = String(error);
    }
  }

  private exploreTarget(): TargetSpec {
    if (this.state.lastQuery !== null) {
      return { kind: "query", query: this.state.lastQuery };
    }
    return { kind: "cube", cube: this.state.explore.cube };
  }

  // -- explore actions --------------------------------------------------

  setTab(tab: Tab): void {
    this.state.tab = tab;
    this.refreshView();
  }

  toggleMeasure(name: string): void {
    const picked = this.state.explore.selectedMeasures;
    this.state.explore.selectedMeasures = picked.includes(name)
      ? picked.filter((m) => m !== name)
      : [...picked, name];
    this.refreshView();
  }

  toggleDimension(name: string): void {
    const picked = this.state.explore.selectedDimensions;
    this.state.explore.selectedDimensions = picked.includes(name)
      ? picked.filter((d) => d !== name)
      : [...picked, name];
    this.refreshView();
  }

  setChartType(chartType: ChartType): void {
    this.state.explore.chartType = chartType;
    this.refreshView();
  }

  addFilterDraft(): void {
    this.state.explore.filterDrafts.push({ member: "", operator: "in", values: [] });
    this.refreshView();
  }

  updateFilterDraft(index: number, patch: Partial<FilterDraft>): void {
    const draft = this.state.explore.filterDrafts[index];
    if (draft) Object.assign(draft, patch);
    this.refreshView();
  }

  removeFilterDraft(index: number): void {
    this.state.explore.filterDrafts.splice(index, 1);
    this.refreshView();
  }

  async runQuery(): Promise<void> {
    const problem = selectionProblem(this.state.explore);
    if (problem !== null) {
      // invalid selections never leave the browser
      this.state.inlineMessage = problem;
      this.refreshView();
      return;
    }
    this.state.inlineMessage = null;
    const doc = buildQuery(this.state.explore);
    try {
      this.state.explore.lastResult = await this.client.runQuery(doc);
      this.state.lastQuery = doc;
      this.state.exploreThread = null;
      this.state.banner = null;
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  // -- session actions --------------------------------------------------

  async openSession(): Promise<void> {
    const draft = this.state.sessionDraft;
    try {
      const info = await this.client.openSession(
        [{ displayName: draft.name, mbox: draft.mbox }],
        { kind: "virtual", label: draft.label || "analysis desk" },
      );
      this.state.session = info;
      this.state.actingPersonId = info.participants[0]?.personId ?? null;
      this.state.banner = null;
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  async closeSession(): Promise<void> {
    if (this.state.session === null) return;
    try {
      this.state.session = await this.client.closeSession(this.state.session.sessionId);
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  // -- annotation actions ------------------------------------------------

  async addComment(): Promise<void> {
    if (this.state.session === null || this.state.actingPersonId === null) {
      this.state.banner = "open a session before commenting";
      this.refreshView();
      return;
    }
    const body = this.state.explore.commentDraft.trim();
    if (!body) {
      this.state.inlineMessage = "write a comment first";
      this.refreshView();
      return;
    }
    try {
      await this.client.addAnnotation({
        sessionId: this.state.session.sessionId,
        author: this.state.actingPersonId,
        target: this.exploreTarget(),
        kind: this.state.commentKind,
        body,
        inReplyTo: this.state.replyTo ?? undefined,
      });
      this.state.explore.commentDraft = "";
      this.state.replyTo = null;
      this.state.inlineMessage = null;
      this.state.banner = null;
      // view content comes from the service, not from what we just sent
      this.state.exploreThread = await this.client.enlistAnnotations(this.exploreTarget());
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  async enlistComments(): Promise<void> {
    try {
      this.state.exploreThread = await this.client.enlistAnnotations(this.exploreTarget());
      this.state.banner = null;
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  beginReply(annotation: AnnotationInfo): void {
    this.state.replyTo = annotation.annotationId;
    if (this.state.commentKind === "comment") this.state.commentKind = "answer";
    this.refreshView();
  }

  beginEdit(annotation: AnnotationInfo): void {
    this.state.editDraft = { annotationId: annotation.annotationId, body: annotation.body };
    this.refreshView();
  }

  cancelEdit(): void {
    this.state.editDraft = null;
    this.refreshView();
  }

  async saveEdit(): Promise<void> {
    const draft = this.state.editDraft;
    if (draft === null || this.state.actingPersonId === null) return;
    try {
      await this.client.editAnnotation(draft.annotationId, draft.body, this.state.actingPersonId);
      this.state.editDraft = null;
      this.state.banner = null;
      await this.refreshThreads();
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  async deleteAnnotation(annotation: AnnotationInfo): Promise<void> {
    if (this.state.actingPersonId === null) return;
    try {
      await this.client.deleteAnnotation(annotation.annotationId, this.state.actingPersonId);
      this.state.banner = null;
      await this.refreshThreads();
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  private async refreshThreads(): Promise<void> {
    if (this.state.exploreThread !== null) {
      this.state.exploreThread = await this.client.enlistAnnotations(this.exploreTarget());
    }
    for (const itemId of Object.keys(this.state.itemThreads)) {
      this.state.itemThreads[itemId] = await this.client.enlistAnnotations({
        kind: "dashboardItem",
        itemId,
      });
    }
  }

  // -- dashboard actions --------------------------------------------------

  async addToDashboard(): Promise<void> {
    const problem = selectionProblem(this.state.explore);
    if (problem !== null) {
      this.state.inlineMessage = problem;
      this.refreshView();
      return;
    }
    const title = this.state.titleDraft.trim();
    if (!title) {
      this.state.inlineMessage = "give the dashboard item a title";
      this.refreshView();
      return;
    }
    this.state.inlineMessage = null;
    try {
      await this.client.addDashboardItem({
        query: buildQuery(this.state.explore),
        chartType: this.state.explore.chartType,
        title,
      });
      this.state.titleDraft = "";
      this.state.banner = null;
      this.state.dashboard = await this.client.listDashboard();
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  async renameItem(itemId: string): Promise<void> {
    const title = (this.state.itemTitleDrafts[itemId] ?? "").trim();
    if (!title) return;
    try {
      await this.client.updateDashboardItem(itemId, { title });
      delete this.state.itemTitleDrafts[itemId];
      this.state.banner = null;
      this.state.dashboard = await this.client.listDashboard();
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  async deleteItem(itemId: string): Promise<void> {
    try {
      await this.client.deleteDashboardItem(itemId);
      delete this.state.itemThreads[itemId];
      this.state.banner = null;
      this.state.dashboard = await this.client.listDashboard();
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  async enlistItemComments(itemId: string): Promise<void> {
    try {
      this.state.itemThreads[itemId] = await this.client.enlistAnnotations({
        kind: "dashboardItem",
        itemId,
      });
      this.state.banner = null;
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  async addItemComment(itemId: string): Promise<void> {
    if (this.state.session === null || this.state.actingPersonId === null) {
      this.state.banner = "open a session before commenting";
      this.refreshView();
      return;
    }
    const body = (this.state.itemCommentDrafts[itemId] ?? "").trim();
    if (!body) return;
    try {
      await this.client.addAnnotation({
        sessionId: this.state.session.sessionId,
        author: this.state.actingPersonId,
        target: { kind: "dashboardItem", itemId },
        kind: "comment",
        body,
      });
      delete this.state.itemCommentDrafts[itemId];
      this.state.banner = null;
      this.state.itemThreads[itemId] = await this.client.enlistAnnotations({
        kind: "dashboardItem",
        itemId,
      });
      this.state.dashboard = await this.client.listDashboard();
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  // -- export actions -----------------------------------------------------

  async downloadExport(): Promise<void> {
    try {
      const payload = await this.client.exportRaw();
      this.state.exportPreview = payload;
      this.state.banner = null;
      // hand the exact bytes to the browser; never parse and re-serialize
      if (this.root !== null && typeof URL.createObjectURL === "function") {
        const blob = new Blob([payload.text], { type: "application/json" });
        const url = URL.createObjectURL(blob);
        const anchor = document.createElement("a");
        anchor.href = url;
        anchor.download = payload.filename ?? "export.json";
        anchor.click();
        URL.revokeObjectURL(url);
      }
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  async runImport(): Promise<void> {
    let doc: unknown;
    try {
      doc = JSON.parse(this.state.importDraft);
    } catch {
      this.state.inlineMessage = "the import box does not contain valid JSON";
      this.refreshView();
      return;
    }
    try {
      const outcome = await this.client.importDocument(doc);
      this.state.lastImport = outcome.itemIds;
      this.state.importDraft = "";
      this.state.banner = null;
      this.state.dashboard = await this.client.listDashboard();
    } catch (error) {
      this.reportError(error);
    }
    this.refreshView();
  }

  // -- rendering ------------------------------------------------------------

  private refreshView(): void {
    if (this.root === null) return;
    const tree = mount(this.render(), this.root.ownerDocument);
    this.root.replaceChildren(tree);
  }

  render(): VNode {
    const tabs: [Tab, string][] = [
      ["explore", "Explore"],
      ["dashboard", "Dashboard"],
      ["export", "Export Data"],
    ];
    const nav = h(
      "nav",
      { class: "tabs" },
      ...tabs.map(([tab, label]) =>
        withHandlers(
          h("button", {
            class: "tab" + (this.state.tab === tab ? " active" : ""),
            "data-tab": tab,
          }, label),
          { click: () => this.setTab(tab) },
        ),
      ),
    );
    const parts: (VNode | string)[] = [nav];
    if (this.state.banner !== null) {
      parts.push(h("div", { class: "banner", role: "alert" }, this.state.banner));
    }
    if (this.state.tab === "explore") parts.push(this.renderExplore());
    if (this.state.tab === "dashboard") parts.push(this.renderDashboard());
    if (this.state.tab === "export") parts.push(this.renderExport());
    return h("div", { class: "app" }, ...parts);
  }

  private renderSessionBox(): VNode {
    const session = this.state.session;
    if (session === null || !session.open) {
      const draft = this.state.sessionDraft;
      return h(
        "section",
        { class: "session-box" },
        h("h3", {}, "Session"),
        withHandlers(h("input", {
          class: "participant-name", placeholder: "your name", value: draft.name,
        }), { input: (e) => { draft.name = (e.target as HTMLInputElement).value; } }),
        withHandlers(h("input", {
          class: "participant-mbox", placeholder: "mailto:you@example.org", value: draft.mbox,
        }), { input: (e) => { draft.mbox = (e.target as HTMLInputElement).value; } }),
        withHandlers(h("input", {
          class: "session-label", placeholder: "where", value: draft.label,
        }), { input: (e) => { draft.label = (e.target as HTMLInputElement).value; } }),
        withHandlers(h("button", { class: "open-session" }, "Open Session"),
          { click: () => void this.openSession() }),
      );
    }
    const names = session.participants.map((p) => p.displayName).join(", ");
    return h(
      "section",
      { class: "session-box" },
      h("h3", {}, "Session"),
      h("p", { class: "session-line" }, `open since ${session.start} with ${names}`),
      withHandlers(h("button", { class: "close-session" }, "Close Session"),
        { click: () => void this.closeSession() }),
    );
  }

  private renderMemberPickers(): VNode {
    const members = this.state.members;
    if (members === null) return h("p", { class: "loading" }, "loading cube metadata");
    const explore = this.state.explore;
    const measureBoxes = members.measures.map((m) => {
      const checkbox = h("input", {
        type: "checkbox",
        class: "measure-toggle",
        "data-name": m.name,
        ...(explore.selectedMeasures.includes(m.name) ? { checked: "checked" } : {}),
      });
      return h("label", { class: "member" },
        withHandlers(checkbox, { change: () => this.toggleMeasure(m.name) }),
        `${m.name} (${m.kind})`);
    });
    const dimensionBoxes = members.dimensions.map((d) => {
      const checkbox = h("input", {
        type: "checkbox",
        class: "dimension-toggle",
        "data-name": d.name,
        ...(explore.selectedDimensions.includes(d.name) ? { checked: "checked" } : {}),
      });
      return h("label", { class: "member" },
        withHandlers(checkbox, { change: () => this.toggleDimension(d.name) }),
        `${d.name} (${d.kind})`);
    });
    return h(
      "section",
      { class: "members" },
      h("div", { class: "measures" }, h("h4", {}, "Measures"), ...measureBoxes),
      h("div", { class: "dimensions" }, h("h4", {}, "Dimensions"), ...dimensionBoxes),
    );
  }

  private renderFilters(): VNode {
    const drafts = this.state.explore.filterDrafts;
    const dimensionNames = this.state.members?.dimensions.map((d) => d.name) ?? [];
    const rows = drafts.map((draft, index) => {
      const memberSelect = h(
        "select",
        { class: "filter-member" },
        h("option", { value: "" }, "member"),
        ...dimensionNames.map((name) =>
          h("option", { value: name, ...(draft.member === name ? { selected: "selected" } : {}) }, name)),
      );
      const operatorSelect = h(
        "select",
        { class: "filter-operator" },
        ...["equals", "in", "inDateRange"].map((op) =>
          h("option", { value: op, ...(draft.operator === op ? { selected: "selected" } : {}) }, op)),
      );
      const valuesInput = h("input", {
        class: "filter-values",
        placeholder: "comma separated values",
        value: draft.values.join(", "),
      });
      return h(
        "div",
        { class: "filter-row" },
        withHandlers(memberSelect, {
          change: (e) => this.updateFilterDraft(index, { member: (e.target as HTMLSelectElement).value }),
        }),
        withHandlers(operatorSelect, {
          change: (e) => this.updateFilterDraft(index, {
            operator: (e.target as HTMLSelectElement).value as FilterDraft["operator"],
          }),
        }),
        withHandlers(valuesInput, {
          input: (e) => this.updateFilterDraft(index, {
            values: (e.target as HTMLInputElement).value
              .split(",").map((v) => v.trim()).filter((v) => v.length > 0),
          }),
        }),
        withHandlers(h("button", { class: "remove-filter" }, "Remove"),
          { click: () => this.removeFilterDraft(index) }),
      );
    });
    return h(
      "section",
      { class: "filters" },
      h("h4", {}, "Filters"),
      ...rows,
      withHandlers(h("button", { class: "add-filter" }, "Add Filter"),
        { click: () => this.addFilterDraft() }),
    );
  }

  private renderExplore(): VNode {
    const explore = this.state.explore;
    const chartSelect = h(
      "select",
      { class: "chart-type" },
      ...(["table", "pie", "bar", "line"] as ChartType[]).map((t) =>
        h("option", { value: t, ...(explore.chartType === t ? { selected: "selected" } : {}) }, t)),
    );
    const pieces: (VNode | string)[] = [
      this.renderSessionBox(),
      this.renderMemberPickers(),
      this.renderFilters(),
      h("section", { class: "run-controls" },
        withHandlers(chartSelect, {
          change: (e) => this.setChartType((e.target as HTMLSelectElement).value as ChartType),
        }),
        withHandlers(h("button", { class: "run-query" }, "Run Query"),
          { click: () => void this.runQuery() })),
    ];
    if (this.state.inlineMessage !== null) {
      pieces.push(h("p", { class: "inline-message" }, this.state.inlineMessage));
    }
    if (explore.lastResult !== null) {
      pieces.push(h("section", { class: "result" },
        renderChart(explore.lastResult, explore.chartType)));
    }
    const titleInput = h("input", {
      class: "item-title",
      placeholder: "dashboard item title",
      value: this.state.titleDraft,
    });
    pieces.push(h(
      "section",
      { class: "share-controls" },
      withHandlers(titleInput, {
        input: (e) => { this.state.titleDraft = (e.target as HTMLInputElement).value; },
      }),
      withHandlers(h("button", { class: "add-to-dashboard" }, "Add to Dashboard"),
        { click: () => void this.addToDashboard() }),
    ));
    pieces.push(this.renderCommentBox());
    if (this.state.editDraft !== null) pieces.push(this.renderEditBox());
    if (this.state.exploreThread !== null) {
      pieces.push(h("section", { class: "explore-thread" },
        renderThread(this.state.exploreThread, {
          onReply: (a) => this.beginReply(a),
          onEdit: (a) => this.beginEdit(a),
          onDelete: (a) => void this.deleteAnnotation(a),
        })));
    }
    return h("section", { class: "pane explore-pane" }, ...pieces);
  }

  private renderCommentBox(): VNode {
    const kindSelect = h(
      "select",
      { class: "comment-kind" },
      ...(["comment", "question", "answer", "description"] as AnnotationKind[]).map((k) =>
        h("option", { value: k, ...(this.state.commentKind === k ? { selected: "selected" } : {}) }, k)),
    );
    const bits: (VNode | string)[] = [
      withHandlers(kindSelect, {
        change: (e) => {
          this.state.commentKind = (e.target as HTMLSelectElement).value as AnnotationKind;
        },
      }),
      withHandlers(h("textarea", { class: "comment-body", placeholder: "say something about this view" },
        this.state.explore.commentDraft), {
        input: (e) => { this.state.explore.commentDraft = (e.target as HTMLTextAreaElement).value; },
      }),
      withHandlers(h("button", { class: "add-comment" }, "Add Comment"),
        { click: () => void this.addComment() }),
      withHandlers(h("button", { class: "enlist-comment" }, "Enlist Comment"),
        { click: () => void this.enlistComments() }),
    ];
    if (this.state.replyTo !== null) {
      bits.push(withHandlers(
        h("button", { class: "cancel-reply" }, `replying to ${this.state.replyTo}, cancel`),
        { click: () => { this.state.replyTo = null; this.refreshView(); } }));
    }
    return h("section", { class: "comment-box" }, ...bits);
  }

  private renderEditBox(): VNode {
    const draft = this.state.editDraft!;
    return h(
      "section",
      { class: "edit-box" },
      withHandlers(h("textarea", { class: "edit-body" }, draft.body), {
        input: (e) => { draft.body = (e.target as HTMLTextAreaElement).value; },
      }),
      withHandlers(h("button", { class: "save-edit" }, "Save Edit"),
        { click: () => void this.saveEdit() }),
      withHandlers(h("button", { class: "cancel-edit" }, "Cancel"),
        { click: () => this.cancelEdit() }),
    );
  }

  private renderDashboard(): VNode {
    if (this.state.dashboard.length === 0) {
      return h("section", { class: "pane dashboard-pane" },
        h("p", { class: "dashboard-empty" }, "the dashboard is empty"));
    }
    // items arrive already ordered by position; render them as given
    const cards = this.state.dashboard.map((item) => this.renderItemCard(item));
    return h("section", { class: "pane dashboard-pane" }, ...cards);
  }

  private renderItemCard(item: DashboardItemInfo): VNode {
    const titleInput = h("input", {
      class: "rename-title",
      placeholder: "new title",
      value: this.state.itemTitleDrafts[item.itemId] ?? "",
    });
    const commentInput = h("input", {
      class: "item-comment-body",
      placeholder: "comment on this item",
      value: this.state.itemCommentDrafts[item.itemId] ?? "",
    });
    const pieces: (VNode | string)[] = [
      h("header", { class: "item-header" },
        h("span", { class: "position" }, String(item.position)),
        h("h3", { class: "title" }, item.title),
        h("span", { class: "chart-kind" }, item.chartType)),
      h("pre", { class: "query-text" }, item.queryText),
      h("p", { class: "comment-count" }, `${item.commentRefs.length} linked annotations`),
      h("div", { class: "item-controls" },
        withHandlers(titleInput, {
          input: (e) => {
            this.state.itemTitleDrafts[item.itemId] = (e.target as HTMLInputElement).value;
          },
        }),
        withHandlers(h("button", { class: "rename-item" }, "Rename"),
          { click: () => void this.renameItem(item.itemId) }),
        withHandlers(h("button", { class: "delete-item" }, "Delete"),
          { click: () => void this.deleteItem(item.itemId) }),
        withHandlers(h("button", { class: "enlist-item-comments" }, "Enlist Comment"),
          { click: () => void this.enlistItemComments(item.itemId) })),
      h("div", { class: "item-comment-box" },
        withHandlers(commentInput, {
          input: (e) => {
            this.state.itemCommentDrafts[item.itemId] = (e.target as HTMLInputElement).value;
          },
        }),
        withHandlers(h("button", { class: "add-item-comment" }, "Add Comment"),
          { click: () => void this.addItemComment(item.itemId) })),
    ];
    const thread = this.state.itemThreads[item.itemId];
    if (thread !== undefined) {
      pieces.push(h("div", { class: "item-thread" }, renderThread(thread, {
        onEdit: (a) => this.beginEdit(a),
        onDelete: (a) => void this.deleteAnnotation(a),
      })));
    }
    return h("article", { class: "item-card", "data-item-id": item.itemId }, ...pieces);
  }

  private renderExport(): VNode {
    const pieces: (VNode | string)[] = [
      withHandlers(h("button", { class: "download-export" }, "Download Export"),
        { click: () => void this.downloadExport() }),
    ];
    if (this.state.exportPreview !== null) {
      pieces.push(h("p", { class: "export-filename" },
        this.state.exportPreview.filename ?? "export.json"));
      pieces.push(h("pre", { class: "export-preview" }, this.state.exportPreview.text));
    }
    pieces.push(h("h3", {}, "Import"));
    pieces.push(withHandlers(
      h("textarea", { class: "import-body", placeholder: "paste an export document" },
        this.state.importDraft),
      { input: (e) => { this.state.importDraft = (e.target as HTMLTextAreaElement).value; } }));
    pieces.push(withHandlers(h("button", { class: "run-import" }, "Import"),
      { click: () => void this.runImport() }));
    if (this.state.lastImport !== null) {
      pieces.push(h("p", { class: "import-outcome" },
        `imported ${this.state.lastImport.length} items`));
    }
    if (this.state.inlineMessage !== null && this.state.tab === "export") {
      pieces.push(h("p", { class: "inline-message" }, this.state.inlineMessage));
    }
    return h("section", { class: "pane export-pane" }, ...pieces);
  }
}

// Convenience entry point used by index.html.
export function bootApp(config: { baseUrl: string; token?: string | null }, root: HTMLElement): App {
  const app = new App(new ApiClient(config), root);
  void app.init().then(() => app.startPolling());
  return app;
}

export { findAll };
