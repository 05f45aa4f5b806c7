// Wire types for the /api routes. These mirror the JSON the service actually
// sends; nothing here is reshaped or enriched on the client side.

export type FilterOperator = "equals" | "in" | "inDateRange";

export interface QueryFilter {
  member: string;
  operator: FilterOperator;
  values: string[];
}

export interface TimeDimensionSpec {
  member: string;
  granularity: "day" | "month" | "year";
  dateRange?: [string, string];
}

export interface QueryDocument {
  cube: string;
  measures: string[];
  dimensions?: string[];
  filters?: QueryFilter[];
  timeDimension?: TimeDimensionSpec;
  orderBy?: [string, "asc" | "desc"][];
  limit?: number;
}

export interface ResultTable {
  header: string[];
  rows: (string | number | null)[][];
}

export interface MeasureInfo {
  name: string;
  kind: string;
  column?: string;
  format?: string;
  drillMembers?: string[];
}

export interface DimensionInfo {
  name: string;
  kind: string;
}

export interface CubeMembers {
  cube: string;
  measures: MeasureInfo[];
  dimensions: DimensionInfo[];
}

export type LocationSpec =
  | { kind: "virtual"; label: string }
  | { kind: "physical"; name: string; latitude: number; longitude: number };

export interface ParticipantInfo {
  personId: string;
  displayName: string;
}

export interface SessionInfo {
  sessionId: string;
  start: string;
  end: string | null;
  open: boolean;
  location: LocationSpec;
  participants: ParticipantInfo[];
}

export interface ProfileSpec {
  displayName: string;
  mbox: string;
  organization?: string;
  knows?: string[];
}

export type TargetSpec =
  | { kind: "cube"; cube: string }
  | { kind: "dashboardItem"; itemId: string }
  | { kind: "query"; query: QueryDocument };

export type AnnotationKind = "comment" | "question" | "answer" | "description";

export interface AnnotationInfo {
  annotationId: string;
  kind: AnnotationKind;
  body: string;
  author: string;
  authorName: string;
  sessionId: string;
  target: TargetSpec;
  createdAt: string;
  modifiedAt: string;
  inReplyTo: string | null;
  replyTargetDeleted: string | null;
}

export type ChartType = "pie" | "bar" | "line" | "table";

export interface DashboardItemInfo {
  itemId: string;
  title: string;
  description: string | null;
  chartType: ChartType;
  query: QueryDocument;
  queryText: string;
  commentRefs: string[];
  createdAt: string;
  modifiedAt: string;
  position: number;
}

export interface HealthInfo {
  status: string;
  cubes: number;
  items: number;
}
