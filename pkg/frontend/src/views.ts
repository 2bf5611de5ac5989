/** Pure DOM builders for the caregiver dashboard.
 *
 * Every function maps API documents to elements with no recomputation:
 * scores, predictions, and trends are rendered exactly as received, and
 * row order always follows the response order.
 */

import type {
  ClusterDoc,
  ClusterEdit,
  DailyEntry,
  EmotionDoc,
  RankingRow,
  UserDetailDoc,
} from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

const TREND_ARROWS: Record<string, string> = {
  Improving: "↑",
  Declining: "↓",
  Flat: "→",
  NoData: "·",
};

function formatScore(score: number | null): string {
  return score === null ? "–" : score.toFixed(2);
}

/** "unclassified" covers every prediction the model would not stand behind. */
export function isUnclassified(row: {
  prediction_status: string;
  confidence: number;
}): boolean {
  return row.prediction_status !== "Ok" || row.confidence === 0;
}

export function predictionBadge(row: {
  predicted_type: string;
  prediction_status: string;
  confidence: number;
}): HTMLElement {
  if (isUnclassified(row)) {
    return el("span", "badge unclassified", "unclassified");
  }
  const badge = el("span", "badge classified", row.predicted_type);
  badge.title = `confidence ${row.confidence.toFixed(2)}`;
  return badge;
}

export function rankingTable(
  rows: RankingRow[],
  onSelect: (userId: string) => void,
): HTMLElement {
  if (rows.length === 0) {
    return el("div", "empty-state", "No users yet.");
  }
  const table = el("table", "ranking");
  const head = table.createTHead().insertRow();
  for (const label of ["User", "Score", "Predicted", "Trend", "Last report"]) {
    head.appendChild(el("th", undefined, label));
  }
  const body = table.createTBody();
  for (const row of rows) {
    const tr = body.insertRow();
    tr.dataset.userId = row.user_id;
    tr.insertCell().textContent = row.display_name;
    const scoreCell = tr.insertCell();
    scoreCell.textContent = formatScore(row.compliance_score);
    scoreCell.dataset.score = String(row.compliance_score);
    tr.insertCell().appendChild(predictionBadge(row));
    const trendCell = tr.insertCell();
    trendCell.textContent = TREND_ARROWS[row.trend.direction] ?? "?";
    trendCell.title = row.trend.direction;
    tr.insertCell().textContent = row.last_report_at ?? "never";
    tr.addEventListener("click", () => onSelect(row.user_id));
  }
  return table;
}

/** Daily-score chart: one mark per day, values echoed in data-score. */
export function complianceChart(daily: DailyEntry[]): SVGSVGElement {
  const width = 560;
  const height = 120;
  const pad = 10;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "compliance-chart");

  const scored = daily.filter((d) => d.score !== null);
  if (scored.length === 0) {
    const note = document.createElementNS(SVG_NS, "text");
    note.setAttribute("x", String(width / 2));
    note.setAttribute("y", String(height / 2));
    note.setAttribute("class", "chart-empty");
    note.textContent = "no activity in window";
    svg.appendChild(note);
    return svg;
  }

  const step = daily.length > 1 ? (width - 2 * pad) / (daily.length - 1) : 0;
  const x = (i: number) => pad + i * step;
  const y = (score: number) => height - pad - score * (height - 2 * pad);

  const line = document.createElementNS(SVG_NS, "polyline");
  line.setAttribute(
    "points",
    daily
      .map((d, i) => (d.score === null ? null : `${x(i)},${y(d.score)}`))
      .filter((p) => p !== null)
      .join(" "),
  );
  line.setAttribute("class", "score-line");
  svg.appendChild(line);

  daily.forEach((day, i) => {
    if (day.score === null) {
      // Days without assignments stay visually distinct from score 0.
      const tick = document.createElementNS(SVG_NS, "line");
      tick.setAttribute("x1", String(x(i)));
      tick.setAttribute("x2", String(x(i)));
      tick.setAttribute("y1", String(height - pad));
      tick.setAttribute("y2", String(height - pad - 4));
      tick.setAttribute("class", "noday");
      tick.setAttribute("data-date", day.date);
      svg.appendChild(tick);
      return;
    }
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(x(i)));
    dot.setAttribute("cy", String(y(day.score)));
    dot.setAttribute("r", "3");
    dot.setAttribute("class", day.reported === 0 ? "dot unreported" : "dot");
    dot.setAttribute("data-date", day.date);
    dot.setAttribute("data-score", String(day.score));
    svg.appendChild(dot);
  });
  return svg;
}

export function emotionStrip(emotions: EmotionDoc[]): HTMLElement {
  const strip = el("div", "emotion-strip");
  if (emotions.length === 0) {
    strip.appendChild(el("span", "empty-state", "no mood reports"));
    return strip;
  }
  for (const entry of emotions) {
    const chip = el("span", `chip emotion-${entry.emotion.toLowerCase()}`);
    chip.textContent = entry.emotion;
    chip.title = entry.reported_at;
    strip.appendChild(chip);
  }
  return strip;
}

export function errorBanner(code: string, message: string): HTMLElement {
  const banner = el("div", "banner error");
  banner.appendChild(el("strong", undefined, code));
  banner.appendChild(el("span", undefined, ` ${message}`));
  return banner;
}

export interface DetailHandlers {
  onRefine: (userId: string, templateId: string) => void;
}

export function detailPanel(
  detail: UserDetailDoc,
  templates: string[],
  handlers: DetailHandlers,
): HTMLElement {
  const panel = el("section", "detail");
  const userId = detail.user.user_id;
  panel.dataset.userId = userId;
  panel.appendChild(el("h2", undefined, userId));

  const plan = detail.plan;
  panel.appendChild(
    el(
      "p",
      "plan-line",
      plan
        ? `Plan ${plan.plan_id} (${plan.template_id}), week of ${plan.week_start}`
        : "No plan assigned yet.",
    ),
  );
  if (plan) {
    const planLine = panel.querySelector(".plan-line") as HTMLElement;
    planLine.dataset.planId = plan.plan_id;
  }

  panel.appendChild(complianceChart(detail.window.daily));
  panel.appendChild(emotionStrip(detail.emotions));

  const trail = el("ul", "label-trail");
  for (const entry of detail.label_trail) {
    trail.appendChild(
      el("li", undefined, `${entry.model}: ${entry.label} (${entry.source})`),
    );
  }
  panel.appendChild(trail);

  const controls = el("div", "refine-controls");
  const select = el("select");
  select.className = "template-select";
  for (const templateId of templates) {
    const option = document.createElement("option");
    option.value = templateId;
    option.textContent = templateId;
    select.appendChild(option);
  }
  const button = el("button", "refine-button", "Refine plan");
  button.addEventListener("click", () =>
    handlers.onRefine(userId, select.value),
  );
  controls.appendChild(select);
  controls.appendChild(button);
  panel.appendChild(controls);
  panel.appendChild(el("div", "audit-note"));
  return panel;
}

/** Drag-free cluster editor: a move target per member, confirm collects
 * only the members whose target differs from where they sit now. */
export function clusterBoard(
  clusters: ClusterDoc[],
  onConfirm: (edits: ClusterEdit[]) => void,
): HTMLElement {
  const board = el("section", "clusters");
  const moves = new Map<string, string>();
  const ids = clusters.map((c) => c.cluster_id);

  for (const cluster of clusters) {
    const box = el("div", "cluster");
    box.dataset.clusterId = cluster.cluster_id;
    box.appendChild(
      el(
        "h3",
        undefined,
        `${cluster.cluster_id}${cluster.confirmed ? " (confirmed)" : ""}`,
      ),
    );
    for (const memberId of cluster.member_ids) {
      const row = el("div", "member");
      row.appendChild(el("span", undefined, memberId));
      const select = el("select");
      select.dataset.activityId = memberId;
      for (const target of ids) {
        const option = document.createElement("option");
        option.value = target;
        option.textContent = target;
        option.selected = target === cluster.cluster_id;
        select.appendChild(option);
      }
      select.addEventListener("change", () => {
        if (select.value === cluster.cluster_id) moves.delete(memberId);
        else moves.set(memberId, select.value);
      });
      row.appendChild(select);
      box.appendChild(row);
    }
    board.appendChild(box);
  }

  const confirm = el("button", "confirm-clusters", "Confirm clusters");
  confirm.addEventListener("click", () =>
    onConfirm(
      [...moves.entries()].map(([activity_id, cluster_id]) => ({
        activity_id,
        cluster_id,
      })),
    ),
  );
  board.appendChild(confirm);
  return board;
}

export function broadcastComposer(
  onSend: (text: string, filter: string) => void,
): HTMLElement {
  const box = el("section", "broadcast");
  const input = el("textarea");
  input.className = "broadcast-text";
  const filter = el("select");
  filter.className = "broadcast-filter";
  for (const value of ["all", "type:Active", "type:Neutral", "type:Passive"]) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value;
    filter.appendChild(option);
  }
  const send = el("button", "broadcast-send", "Send");
  send.addEventListener("click", () => onSend(input.value, filter.value));
  box.appendChild(input);
  box.appendChild(filter);
  box.appendChild(send);
  return box;
}
