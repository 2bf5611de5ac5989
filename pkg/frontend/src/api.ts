/** Thin typed client for the caregiver API.
 *
 * Every dashboard number comes out of these documents untouched; the
 * client adds the token header and turns error bodies into ApiError.
 */

import type {
  BroadcastDoc,
  ClusterEdit,
  ClustersDoc,
  RankingDoc,
  RefineDoc,
  UserDetailDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface ClientOptions {
  baseUrl?: string;
  token?: string;
  fetchFn?: typeof fetch;
}

export interface Client {
  ranking(asOf?: string): Promise<RankingDoc>;
  userDetail(userId: string, asOf?: string): Promise<UserDetailDoc>;
  refine(userId: string, templateId: string, asOf?: string): Promise<RefineDoc>;
  proposedClusters(): Promise<ClustersDoc>;
  confirmClusters(edits: ClusterEdit[]): Promise<ClustersDoc>;
  broadcast(text: string, filter: string): Promise<BroadcastDoc>;
}

export function createClient(options: ClientOptions = {}): Client {
  const base = options.baseUrl ?? "";
  const fetchFn = options.fetchFn ?? fetch;

  async function call<T>(
    method: string,
    path: string,
    query?: Record<string, string | undefined>,
    body?: unknown,
  ): Promise<T> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(query ?? {})) {
      if (value !== undefined) params.set(key, value);
    }
    const suffix = params.size ? `?${params.toString()}` : "";
    const headers: Record<string, string> = {};
    if (options.token) headers["X-Caregiver-Token"] = options.token;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const res = await fetchFn(`${base}${path}${suffix}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const doc = await res.json();
    if (!res.ok) {
      throw new ApiError(
        doc.code ?? "UnknownError",
        doc.message ?? res.statusText,
        res.status,
      );
    }
    return doc as T;
  }

  return {
    ranking: (asOf) => call("GET", "/ranking", { as_of: asOf }),
    userDetail: (userId, asOf) =>
      call("GET", `/users/${userId}`, { as_of: asOf }),
    refine: (userId, templateId, asOf) =>
      call("POST", `/users/${userId}/refine`, undefined, {
        template_id: templateId,
        ...(asOf === undefined ? {} : { as_of: asOf }),
      }),
    proposedClusters: () => call("GET", "/clusters/proposed"),
    confirmClusters: (edits) =>
      call("POST", "/clusters/confirm", undefined, { edits }),
    broadcast: (text, filter) =>
      call("POST", "/broadcast", undefined, { text, filter }),
  };
}
