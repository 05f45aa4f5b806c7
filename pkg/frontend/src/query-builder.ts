// Explore-tab state and the translation from picked members to a query
// document. Validation here mirrors what the service enforces so obviously
// bad requests never leave the browser; the server stays the authority.

import type {
  ChartType,
  FilterOperator,
  QueryDocument,
  ResultTable,
} from "./types.js";

export interface FilterDraft {
  member: string;
  operator: FilterOperator;
  values: string[];
}

export interface TimeDraft {
  member: string;
  granularity: "day" | "month" | "year";
  dateRange?: [string, string];
}

export interface ExploreState {
  cube: string;
  selectedMeasures: string[];
  selectedDimensions: string[];
  filterDrafts: FilterDraft[];
  timeDraft: TimeDraft | null;
  chartType: ChartType;
  lastResult: ResultTable | null;
  commentDraft: string;
}

export function newExploreState(cube: string): ExploreState {
  return {
    cube,
    selectedMeasures: [],
    selectedDimensions: [],
    filterDrafts: [],
    timeDraft: null,
    chartType: "table",
    lastResult: null,
    commentDraft: "",
  };
}

function filterProblem(draft: FilterDraft): string | null {
  if (!draft.member) return "every filter needs a member";
  const n = draft.values.length;
  if (draft.operator === "equals" && n !== 1) {
    return `filter on ${draft.member}: equals takes exactly one value`;
  }
  if (draft.operator === "in" && n === 0) {
    return `filter on ${draft.member}: in needs at least one value`;
  }
  if (draft.operator === "inDateRange" && n !== 2) {
    return `filter on ${draft.member}: inDateRange takes a start and an end date`;
  }
  return null;
}

// Null means the state can be sent. A string is the inline message shown in
// the Explore tab instead of issuing a request.
export function selectionProblem(state: ExploreState): string | null {
  if (state.selectedMeasures.length === 0 && state.selectedDimensions.length === 0) {
    return "pick at least one measure or dimension first";
  }
  for (const draft of state.filterDrafts) {
    const problem = filterProblem(draft);
    if (problem !== null) return problem;
  }
  if (state.chartType === "pie") {
    // same rule the dashboard enforces server-side
    if (
      state.selectedMeasures.length !== 1 ||
      state.selectedDimensions.length !== 1 ||
      state.timeDraft !== null
    ) {
      return "a pie chart needs exactly one measure and one dimension and no time axis";
    }
  }
  return null;
}

export function buildQuery(state: ExploreState): QueryDocument {
  const problem = selectionProblem(state);
  if (problem !== null) throw new Error(problem);
  const doc: QueryDocument = {
    cube: state.cube,
    measures: [...state.selectedMeasures],
  };
  if (state.selectedDimensions.length > 0) {
    doc.dimensions = [...state.selectedDimensions];
  }
  if (state.filterDrafts.length > 0) {
    doc.filters = state.filterDrafts.map((d) => ({
      member: d.member,
      operator: d.operator,
      values: [...d.values],
    }));
  }
  if (state.timeDraft !== null) {
    doc.timeDimension = {
      member: state.timeDraft.member,
      granularity: state.timeDraft.granularity,
    };
    if (state.timeDraft.dateRange) {
      doc.timeDimension.dateRange = [...state.timeDraft.dateRange];
    }
  }
  return doc;
}
