/**
 * Runtime schemas for everything that crosses the HTTP boundary.
 *
 * The service is the source of truth; these schemas only verify that a
 * payload has the shape the UI is about to render. Anything that fails
 * to parse is shown as an error card instead of crashing the page.
 */

import { z } from "zod";

export const PathEdge = z.object({
  src: z.string(),
  dst: z.string(),
});

export const Explanation = z.object({
  template_id: z.string(),
  text: z.string(),
  evidence: z.record(z.unknown()),
});

export const SearchResult = z.object({
  doc_id: z.string(),
  title: z.string(),
  kind: z.enum(["direct", "transitive"]),
  score: z.number(),
  origin: z.string(),
  path_nodes: z.array(z.string()),
  path_edges: z.array(PathEdge),
  explanation: Explanation,
});

export const SubgraphNode = z.object({
  id: z.string(),
  kind: z.string(),
  tag: z.enum(["query", "direct", "transitive", "connector"]),
  label: z.string(),
});

export const SubgraphEdge = z.object({
  src: z.string(),
  dst: z.string(),
  level: z.union([z.number(), z.literal("query")]),
  weight: z.number(),
  provenance: z.array(z.string()),
});

export const Subgraph = z.object({
  nodes: z.array(SubgraphNode),
  edges: z.array(SubgraphEdge),
});

export const SearchResponse = z.object({
  query_echo: z.string(),
  unknown_terms: z.array(z.string()),
  snapshot_version: z.number(),
  results: z.array(SearchResult),
  subgraph: Subgraph,
});

/** 422 body when no query word is known: suggestions per unknown token. */
export const EmptyQueryBody = z.object({
  error: z.literal("empty_query"),
  unknown_terms: z.array(z.string()),
  suggestions: z.record(z.array(z.string())),
});

export const SuggestResponse = z.object({
  known: z.boolean(),
  df: z.number(),
  suggestions: z.array(z.string()),
});

/** The body the UI sends; must match what the service records verbatim. */
export const FeedbackBody = z.object({
  query_raw: z.string(),
  doc_id: z.string(),
  relevant: z.boolean(),
  value_added: z.number().int().min(1).max(5),
  result_kind: z.enum(["direct", "transitive"]),
  path_edges: z.array(z.tuple([z.string(), z.string()])),
});

export const FeedbackAck = z.object({ id: z.number() });

export const FeedbackErrorBody = z.object({
  error: z.string(),
  detail: z.string().optional(),
});

export const HealthResponse = z.object({
  snapshot_version: z.number().nullable(),
});

export type PathEdgeT = z.infer<typeof PathEdge>;
export type ExplanationT = z.infer<typeof Explanation>;
export type SearchResultT = z.infer<typeof SearchResult>;
export type SubgraphT = z.infer<typeof Subgraph>;
export type SubgraphNodeT = z.infer<typeof SubgraphNode>;
export type SubgraphEdgeT = z.infer<typeof SubgraphEdge>;
export type SearchResponseT = z.infer<typeof SearchResponse>;
export type EmptyQueryBodyT = z.infer<typeof EmptyQueryBody>;
export type SuggestResponseT = z.infer<typeof SuggestResponse>;
export type FeedbackBodyT = z.infer<typeof FeedbackBody>;
