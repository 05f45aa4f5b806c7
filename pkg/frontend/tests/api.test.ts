import { afterEach, describe, expect, test, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

type Call = { url: string; init: RequestInit };

function stubFetch(responder: (url: string, init: RequestInit) => Response): Call[] {
  const calls: Call[] = [];
  vi.stubGlobal("fetch", async (url: string, init: RequestInit = {}) => {
    calls.push({ url, init });
    return responder(url, init);
  });
  return calls;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("request shaping", () => {
  test("bearer token rides along on every call", async () => {
    const calls = stubFetch(() => jsonResponse(200, { status: "ok", cubes: 1, items: 0 }));
    const client = new ApiClient({ baseUrl: "http://svc:1", token: "sesame" });
    await client.health();
    expect(calls[0].url).toBe("http://svc:1/api/health");
    expect((calls[0].init.headers as Record<string, string>)["Authorization"]).toBe(
      "Bearer sesame",
    );
  });

  test("no token, no Authorization header", async () => {
    const calls = stubFetch(() => jsonResponse(200, { status: "ok", cubes: 1, items: 0 }));
    await new ApiClient({ baseUrl: "http://svc:1" }).health();
    expect(calls[0].init.headers).not.toHaveProperty("Authorization");
  });

  test("trailing slashes on the base URL are tolerated", async () => {
    const calls = stubFetch(() => jsonResponse(200, { cubes: [] }));
    await new ApiClient({ baseUrl: "http://svc:1///" }).listCubes();
    expect(calls[0].url).toBe("http://svc:1/api/meta/cubes");
  });

  test("queries go out as POSTed JSON", async () => {
    const calls = stubFetch(() => jsonResponse(200, { header: [], rows: [] }));
    const doc = { cube: "Lineorder", measures: ["count"] };
    await new ApiClient({ baseUrl: "http://svc:1" }).runQuery(doc);
    expect(calls[0].init.method).toBe("POST");
    expect(JSON.parse(calls[0].init.body as string)).toEqual(doc);
    expect((calls[0].init.headers as Record<string, string>)["Content-Type"]).toBe(
      "application/json",
    );
  });

  test("enlist encodes the target as a JSON query parameter", async () => {
    const calls = stubFetch(() => jsonResponse(200, { annotations: [] }));
    const client = new ApiClient({ baseUrl: "http://svc:1" });
    await client.enlistAnnotations({ kind: "cube", cube: "Lineorder" }, "urn:s");
    const url = new URL(calls[0].url);
    expect(url.pathname).toBe("/api/annotations");
    expect(JSON.parse(url.searchParams.get("target")!)).toEqual({
      kind: "cube",
      cube: "Lineorder",
    });
    expect(url.searchParams.get("session")).toBe("urn:s");
  });

  test("annotation ids are URL escaped in paths", async () => {
    const calls = stubFetch(() => jsonResponse(200, { deleted: true }));
    const client = new ApiClient({ baseUrl: "http://svc:1" });
    await client.deleteAnnotation("urn:cbi:ann/12", "urn:cbi:person/1");
    expect(calls[0].url).toContain("/api/annotations/urn%3Acbi%3Aann%2F12?");
  });
});

describe("error translation", () => {
  test("service error payloads become ApiError", async () => {
    stubFetch(() => jsonResponse(409, { error: "StateError", message: "session is closed" }));
    const client = new ApiClient({ baseUrl: "http://svc:1" });
    const failure = await client.closeSession("urn:s").catch((e) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.status).toBe(409);
    expect(failure.error).toBe("StateError");
    expect(failure.message).toBe("session is closed");
  });

  test("non JSON error bodies still raise with the status", async () => {
    stubFetch(() => new Response("<html>gateway</html>", { status: 502 }));
    const failure = await new ApiClient({ baseUrl: "http://svc:1" })
      .health()
      .catch((e) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.status).toBe(502);
    expect(failure.message).toMatch(/502/);
  });
});

describe("export passthrough", () => {
  test("the body text is returned byte for byte", async () => {
    // deliberately odd spacing and key order; any parse/re-serialize would lose it
    const raw = '{\n  "formatVersion": 1,\n    "items":[],  "exportedAt":"2024-06-01T10:00:00Z"}';
    stubFetch(() => new Response(raw, {
      status: 200,
      headers: {
        "content-type": "application/json",
        "content-disposition": 'attachment; filename="cbi-export-20240601T100000Z.json"',
      },
    }));
    const payload = await new ApiClient({ baseUrl: "http://svc:1" }).exportRaw();
    expect(payload.text).toBe(raw);
    expect(payload.filename).toBe("cbi-export-20240601T100000Z.json");
  });

  test("a missing disposition header leaves the filename null", async () => {
    stubFetch(() => new Response("{}", { status: 200 }));
    const payload = await new ApiClient({ baseUrl: "http://svc:1" }).exportRaw();
    expect(payload.filename).toBeNull();
  });
});
