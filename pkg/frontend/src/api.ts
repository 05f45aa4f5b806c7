// Thin fetch client for the BI service. Every call goes through request(),
// which attaches the bearer token and turns error payloads into ApiError.
// The client never reinterprets server data; callers get the JSON as-is.

import type {
  AnnotationInfo,
  AnnotationKind,
  CubeMembers,
  DashboardItemInfo,
  HealthInfo,
  LocationSpec,
  ProfileSpec,
  QueryDocument,
  ResultTable,
  SessionInfo,
  TargetSpec,
} from "./types.js";

export interface ClientConfig {
  baseUrl: string;
  token?: string | null;
}

export class ApiError extends Error {
  readonly status: number;
  readonly error: string;

  constructor(status: number, error: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.error = error;
  }
}

interface RequestOptions {
  method?: string;
  body?: unknown;
  query?: Record<string, string | undefined>;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly token: string | null;

  constructor(config: ClientConfig) {
    this.baseUrl = config.baseUrl.replace(/\/+$/, "");
    this.token = config.token ?? null;
  }

  private async fetchRaw(path: string, options: RequestOptions = {}): Promise<Response> {
    let url = this.baseUrl + path;
    if (options.query) {
      const params = new URLSearchParams();
      for (const [key, value] of Object.entries(options.query)) {
        if (value !== undefined) params.set(key, value);
      }
      const rendered = params.toString();
      if (rendered) url += "?" + rendered;
    }
    const headers: Record<string, string> = {};
    if (this.token !== null) headers["Authorization"] = `Bearer ${this.token}`;
    let body: string | undefined;
    if (options.body !== undefined) {
      headers["Content-Type"] = "application/json";
      body = JSON.stringify(options.body);
    }
    const response = await fetch(url, { method: options.method ?? "GET", headers, body });
    if (!response.ok) {
      let error = "HTTPError";
      let message = `request failed with status ${response.status}`;
      try {
        const doc = await response.json();
        if (doc && typeof doc === "object") {
          if (typeof doc.error === "string") error = doc.error;
          if (typeof doc.message === "string") message = doc.message;
        }
      } catch {
        // non-JSON error body, keep the generic message
      }
      throw new ApiError(response.status, error, message);
    }
    return response;
  }

  private async request<T>(path: string, options: RequestOptions = {}): Promise<T> {
    const response = await this.fetchRaw(path, options);
    return (await response.json()) as T;
  }

  health(): Promise<HealthInfo> {
    return this.request("/api/health");
  }

  listCubes(): Promise<{ cubes: { name: string }[] }> {
    return this.request("/api/meta/cubes");
  }

  cubeMembers(name: string): Promise<CubeMembers> {
    return this.request(`/api/meta/cubes/${encodeURIComponent(name)}/members`);
  }

  runQuery(doc: QueryDocument): Promise<ResultTable> {
    return this.request("/api/query", { method: "POST", body: doc });
  }

  openSession(participants: ProfileSpec[], location: LocationSpec): Promise<SessionInfo> {
    return this.request("/api/sessions", {
      method: "POST",
      body: { participants, location },
    });
  }

  session(sessionId: string): Promise<SessionInfo> {
    return this.request(`/api/sessions/${encodeURIComponent(sessionId)}`);
  }

  closeSession(sessionId: string): Promise<SessionInfo> {
    return this.request(`/api/sessions/${encodeURIComponent(sessionId)}/close`, {
      method: "POST",
    });
  }

  addAnnotation(input: {
    sessionId: string;
    author: string;
    target: TargetSpec;
    kind: AnnotationKind;
    body: string;
    inReplyTo?: string;
  }): Promise<AnnotationInfo> {
    return this.request("/api/annotations", { method: "POST", body: input });
  }

  enlistAnnotations(target: TargetSpec, sessionId?: string): Promise<AnnotationInfo[]> {
    return this.request<{ annotations: AnnotationInfo[] }>("/api/annotations", {
      query: { target: JSON.stringify(target), session: sessionId },
    }).then((doc) => doc.annotations);
  }

  editAnnotation(annotationId: string, body: string, editor: string): Promise<AnnotationInfo> {
    return this.request(`/api/annotations/${encodeURIComponent(annotationId)}`, {
      method: "PATCH",
      body: { body, editor },
    });
  }

  deleteAnnotation(annotationId: string, requester: string): Promise<{ deleted: boolean }> {
    return this.request(`/api/annotations/${encodeURIComponent(annotationId)}`, {
      method: "DELETE",
      query: { requester },
    });
  }

  listDashboard(): Promise<DashboardItemInfo[]> {
    return this.request<{ items: DashboardItemInfo[] }>("/api/dashboard").then(
      (doc) => doc.items,
    );
  }

  addDashboardItem(input: {
    query: QueryDocument;
    chartType: string;
    title: string;
    description?: string;
  }): Promise<DashboardItemInfo> {
    return this.request("/api/dashboard", { method: "POST", body: input });
  }

  updateDashboardItem(
    itemId: string,
    patch: { query?: QueryDocument; chartType?: string; title?: string },
  ): Promise<DashboardItemInfo> {
    return this.request(`/api/dashboard/${encodeURIComponent(itemId)}`, {
      method: "PATCH",
      body: patch,
    });
  }

  deleteDashboardItem(itemId: string): Promise<{ deleted: boolean; itemId: string }> {
    return this.request(`/api/dashboard/${encodeURIComponent(itemId)}`, {
      method: "DELETE",
    });
  }

  // The export tab saves these bytes verbatim, so this one stays text and
  // never round-trips through JSON.parse.
  async exportRaw(): Promise<{ text: string; filename: string | null }> {
    const response = await this.fetchRaw("/api/export");
    const disposition = response.headers.get("content-disposition");
    let filename: string | null = null;
    if (disposition) {
      const match = /filename="([^"]+)"/.exec(disposition);
      if (match) filename = match[1];
    }
    return { text: await response.text(), filename };
  }

  importDocument(doc: unknown): Promise<{ itemIds: string[] }> {
    return this.request("/api/import", { method: "POST", body: doc });
  }
}
