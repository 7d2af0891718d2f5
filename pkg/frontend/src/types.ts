// Wire types mirroring the query service's JSON bodies. The client never
// recomputes similarity values; it renders these numbers verbatim.

export type SourceClass = "same_category" | "different_category" | "generated_by_llm";

export interface DatasetSummary {
  id: string;
  name: string;
  tags: string[];
}

export interface DatasetDetail extends DatasetSummary {
  summary: string;
  variables: string[];
  source_url: string | null;
}

export interface SearchResponse {
  total: number;
  offset: number;
  results: DatasetSummary[];
}

export interface Hit {
  dataset_id: string;
  name: string;
  rank: number;
  score: number;
  source: SourceClass;
  dice: number;
  description_similarity: number;
}

export interface RecommendationEntry {
  raw_name: string;
  resolved_id: string | null;
  resolved_name: string | null;
  source: SourceClass;
  dice: number | null;
  description_similarity: number | null;
}

export interface QueryResponse {
  task: string;
  dataset_id: string;
  mode: string;
  n: number;
  use_llm: boolean;
  query_category: string;
  hits: Hit[];
  recommendation: { entries: RecommendationEntry[]; warnings: string[] } | null;
  estimation: { predicted: string[]; candidates: string[]; warnings: string[] } | null;
}
