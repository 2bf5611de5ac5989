/** Wire types mirroring the caregiver API documents, field for field. */

export interface TrendDoc {
  direction: "Improving" | "Declining" | "Flat" | "NoData";
  slope: number | null;
}

export interface RankingRow {
  user_id: string;
  display_name: string;
  compliance_score: number | null;
  predicted_type: string;
  confidence: number;
  prediction_status: string;
  trend: TrendDoc;
  last_report_at: string | null;
}

export interface RankingDoc {
  rows: RankingRow[];
  as_of_seq: number;
}

export interface DailyEntry {
  date: string;
  assigned: number;
  complied: number;
  reported: number;
  score: number | null;
}

export interface WindowDoc {
  start: string;
  end: string;
  compliance_score: number | null;
  daily: DailyEntry[];
}

export interface PlanSlotDoc {
  date: string;
  slot_index: number;
  activity_id: string;
  origin: string;
}

export interface PlanDoc {
  plan_id: string;
  user_id: string;
  template_id: string;
  week_start: string;
  slots: PlanSlotDoc[];
  activities?: Record<string, { title: string; kind: string }>;
}

export interface EmotionDoc {
  user_id: string;
  emotion: string;
  reported_at: string;
}

export interface PredictionDoc {
  label: string | null;
  confidence: number;
  status: string;
  neighbors: unknown[];
}

export interface LabelTrailEntry {
  model: string;
  instance_id: string;
  label: string;
  source: string;
  ts: string;
}

export interface UserDetailDoc {
  user: { user_id: string; chat_id: number; profile: Record<string, unknown> };
  plan: PlanDoc | null;
  feedback: Record<string, unknown> | null;
  window: WindowDoc;
  emotions: EmotionDoc[];
  prediction: PredictionDoc;
  label_trail: LabelTrailEntry[];
  refinements: Record<string, unknown>[];
  as_of_seq: number;
}

export interface RefineDoc {
  plan: PlanDoc;
  observed_type: string;
  window_score: number | null;
  as_of_seq: number;
}

export interface ClusterDoc {
  cluster_id: string;
  member_ids: string[];
  confirmed: boolean;
}

export interface ClustersDoc {
  clusters: ClusterDoc[];
  as_of_seq: number;
}

export interface ClusterEdit {
  activity_id: string;
  cluster_id: string;
}

export interface BroadcastDoc {
  messages: { chat_id: number; text: string; keyboard: unknown[] }[];
  as_of_seq: number;
}
