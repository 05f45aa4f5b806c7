// Comment thread rendering. The list comes straight from the enlist route,
// already ordered by the service; rendering preserves that order.

import { h, withHandlers, type VNode } from "./charts.js";
import type { AnnotationInfo } from "./types.js";

export interface ThreadHandlers {
  onReply?: (annotation: AnnotationInfo) => void;
  onEdit?: (annotation: AnnotationInfo) => void;
  onDelete?: (annotation: AnnotationInfo) => void;
}

function replyNote(annotation: AnnotationInfo): VNode | null {
  if (annotation.replyTargetDeleted !== null) {
    return h("span", { class: "reply-note reply-lost" }, "in reply to a deleted annotation");
  }
  if (annotation.inReplyTo !== null) {
    return h("span", { class: "reply-note", "data-reply-to": annotation.inReplyTo }, "in reply");
  }
  return null;
}

export function renderAnnotation(
  annotation: AnnotationInfo,
  handlers: ThreadHandlers = {},
): VNode {
  const headerBits: (VNode | string)[] = [
    h("span", { class: "kind" }, annotation.kind),
    h("span", { class: "author" }, annotation.authorName),
    h("span", { class: "stamp" }, annotation.createdAt),
  ];
  const note = replyNote(annotation);
  if (note) headerBits.push(note);
  if (annotation.modifiedAt !== annotation.createdAt) {
    headerBits.push(h("span", { class: "edited" }, "edited"));
  }
  const controls: VNode[] = [];
  if (handlers.onReply) {
    controls.push(withHandlers(h("button", { class: "reply" }, "Reply"),
      { click: () => handlers.onReply!(annotation) }));
  }
  if (handlers.onEdit) {
    controls.push(withHandlers(h("button", { class: "edit" }, "Edit"),
      { click: () => handlers.onEdit!(annotation) }));
  }
  if (handlers.onDelete) {
    controls.push(withHandlers(h("button", { class: "delete" }, "Delete"),
      { click: () => handlers.onDelete!(annotation) }));
  }
  return h(
    "li",
    { class: "annotation", "data-id": annotation.annotationId, "data-kind": annotation.kind },
    h("div", { class: "annotation-header" }, ...headerBits),
    h("p", { class: "body" }, annotation.body),
    h("div", { class: "controls" }, ...controls),
  );
}

export function renderThread(
  annotations: AnnotationInfo[],
  handlers: ThreadHandlers = {},
): VNode {
  if (annotations.length === 0) {
    return h("p", { class: "thread-empty" }, "no annotations yet");
  }
  return h(
    "ol",
    { class: "thread" },
    ...annotations.map((a) => renderAnnotation(a, handlers)),
  );
}

// What a rendered thread claims, in order. Tests compare this against a
// fresh enlist call to prove the view never drifts from the service.
export function threadDigest(node: VNode): { id: string; kind: string; body: string }[] {
  const entries: { id: string; kind: string; body: string }[] = [];
  const walk = (n: VNode | string) => {
    if (typeof n === "string") return;
    if (n.attrs["class"] === "annotation") {
      let body = "";
      for (const child of n.children) {
        if (typeof child !== "string" && child.attrs["class"] === "body") {
          body = child.children.map((c) => (typeof c === "string" ? c : "")).join("");
        }
      }
      entries.push({ id: n.attrs["data-id"], kind: n.attrs["data-kind"], body });
    }
    if (typeof n !== "string") n.children.forEach(walk);
  };
  walk(node);
  return entries;
}
