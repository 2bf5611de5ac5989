/** A scripted stand-in for the HTTP service: canned documents plus a
 * recording fetch so tests can count and inspect every request. */

import type {
  DailyEntry,
  RankingRow,
  UserDetailDoc,
} from "../src/types.js";

export function rankingRow(overrides: Partial<RankingRow> = {}): RankingRow {
  return {
    user_id: "u-0001",
    display_name: "u-0001",
    compliance_score: 0.5,
    predicted_type: "Neutral",
    confidence: 0.8,
    prediction_status: "Ok",
    trend: { direction: "Flat", slope: 0.0 },
    last_report_at: "2025-03-04T19:00:00+00:00",
    ...overrides,
  };
}

export function dailyWindow(): DailyEntry[] {
  // 28 days: leading nulls (no plan yet), then mixed fractions.
  const days: DailyEntry[] = [];
  for (let i = 0; i < 28; i++) {
    const date = `2025-02-${String(i + 1).padStart(2, "0")}`;
    if (i < 21) {
      days.push({ date, assigned: 0, complied: 0, reported: 0, score: null });
    } else {
      const complied = i % 4;
      days.push({
        date,
        assigned: 3,
        complied,
        reported: Math.min(complied + 1, 3),
        score: complied / 3,
      });
    }
  }
  return days;
}

export function userDetail(
  userId: string,
  overrides: Partial<UserDetailDoc> = {},
): UserDetailDoc {
  return {
    user: { user_id: userId, chat_id: 500, profile: {} },
    plan: {
      plan_id: "p-000007",
      user_id: userId,
      template_id: "baseline-v1",
      week_start: "2025-02-24",
      slots: [],
    },
    feedback: null,
    window: {
      start: "2025-02-01",
      end: "2025-02-28",
      compliance_score: 0.4,
      daily: dailyWindow(),
    },
    emotions: [
      { user_id: userId, emotion: "Happy", reported_at: "2025-02-25T10:00:00+00:00" },
      { user_id: userId, emotion: "Sad", reported_at: "2025-02-26T10:00:00+00:00" },
    ],
    prediction: { label: "Neutral", confidence: 0.8, status: "Ok", neighbors: [] },
    label_trail: [
      {
        model: "pre",
        instance_id: userId,
        label: "baseline-v1",
        source: "CaregiverAssignment",
        ts: "2025-02-21T08:00:00+00:00",
      },
    ],
    refinements: [],
    as_of_seq: 40,
    ...overrides,
  };
}

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

export interface FixtureService {
  fetchFn: typeof fetch;
  requests: RecordedRequest[];
  posts(path: string): RecordedRequest[];
  detailFor: Map<string, UserDetailDoc>;
  rankingRows: RankingRow[];
}

/** Routes just enough of the API for the dashboard: ranking, detail,
 * refine (which swaps in a new plan, as the service would), clusters,
 * broadcast. */
export function fixtureService(): FixtureService {
  const detailFor = new Map<string, UserDetailDoc>([
    ["u-0002", userDetail("u-0002")],
    ["u-0003", userDetail("u-0003", { plan: null, label_trail: [] })],
    ["u-0001", userDetail("u-0001")],
  ]);
  const rankingRows = [
    rankingRow({ user_id: "u-0002", display_name: "u-0002", compliance_score: 0.1 }),
    rankingRow({
      user_id: "u-0003",
      display_name: "u-0003",
      compliance_score: null,
      predicted_type: "Neutral",
      confidence: 0.0,
      prediction_status: "ColdStart",
      trend: { direction: "NoData", slope: null },
      last_report_at: null,
    }),
    rankingRow({ user_id: "u-0001", display_name: "u-0001", compliance_score: 0.9 }),
  ];
  const requests: RecordedRequest[] = [];

  const json = (doc: unknown, status = 200) =>
    new Response(JSON.stringify(doc), {
      status,
      headers: { "Content-Type": "application/json" },
    });

  const fetchFn: typeof fetch = async (input, init) => {
    const url = String(input);
    const path = url.split("?")[0] ?? url;
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    requests.push({ method, path, body });

    if (method === "GET" && path === "/ranking") {
      return json({ rows: rankingRows, as_of_seq: 40 });
    }
    const detailMatch = path.match(/^\/users\/([^/]+)$/);
    if (method === "GET" && detailMatch) {
      const doc = detailFor.get(detailMatch[1]!);
      return doc
        ? json(doc)
        : json({ code: "UnknownUser", message: `no user '${detailMatch[1]}'` }, 404);
    }
    const refineMatch = path.match(/^\/users\/([^/]+)\/refine$/);
    if (method === "POST" && refineMatch) {
      const userId = refineMatch[1]!;
      const doc = detailFor.get(userId);
      if (!doc || !doc.plan) {
        return json(
          { code: "NoAssignedPlan", message: `user '${userId}' has no plan to refine` },
          409,
        );
      }
      const newPlan = {
        ...doc.plan,
        plan_id: "p-000042",
        template_id: (body as { template_id: string }).template_id,
        week_start: "2025-03-01",
      };
      detailFor.set(userId, { ...doc, plan: newPlan, as_of_seq: doc.as_of_seq + 25 });
      return json({
        plan: newPlan,
        observed_type: "Passive",
        window_score: 0.1,
        as_of_seq: doc.as_of_seq + 25,
      });
    }
    if (method === "GET" && path === "/clusters/proposed") {
      return json({
        clusters: [
          { cluster_id: "c-001", member_ids: ["a-walk-30", "a-jog-20"], confirmed: false },
          { cluster_id: "c-002", member_ids: ["a-swim"], confirmed: false },
        ],
        as_of_seq: 40,
      });
    }
    if (method === "POST" && path === "/clusters/confirm") {
      return json({ clusters: [], as_of_seq: 41 });
    }
    if (method === "POST" && path === "/broadcast") {
      return json({ messages: [], as_of_seq: 42 });
    }
    return json({ code: "UnknownRoute", message: path }, 404);
  };

  return {
    fetchFn,
    requests,
    posts: (path) =>
      requests.filter((r) => r.method === "POST" && r.path === path),
    detailFor,
    rankingRows,
  };
}
