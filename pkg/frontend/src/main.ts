/** Dashboard bootstrap: wires API documents to the pure views.
 *
 * State-changing clicks map 1:1 to endpoints: one refine click is one
 * POST /users/{id}/refine followed by a detail + ranking refresh.
 */

import { ApiError, createClient, type Client } from "./api.js";
import type { UserDetailDoc } from "./types.js";
import {
  broadcastComposer,
  clusterBoard,
  detailPanel,
  errorBanner,
  rankingTable,
} from "./views.js";

/** Templates shipped with the service; ids seen in API documents join them. */
const DEFAULT_TEMPLATE_CHOICES = [
  "baseline-v1",
  "balanced-care-v1",
  "active-burn-v1",
];

export function knownTemplates(detail: UserDetailDoc): string[] {
  const seen = new Set(DEFAULT_TEMPLATE_CHOICES);
  if (detail.plan) seen.add(detail.plan.template_id);
  for (const entry of detail.label_trail) {
    if (entry.model === "pre") seen.add(entry.label);
  }
  return [...seen];
}

export async function bootApp(root: HTMLElement, client: Client): Promise<void> {
  root.textContent = "";
  const bannerSlot = document.createElement("div");
  bannerSlot.className = "banner-slot";
  const rankingSlot = document.createElement("div");
  rankingSlot.className = "ranking-slot";
  const detailSlot = document.createElement("div");
  detailSlot.className = "detail-slot";
  const extrasSlot = document.createElement("div");
  extrasSlot.className = "extras-slot";
  root.append(bannerSlot, rankingSlot, detailSlot, extrasSlot);

  let refineInFlight = false;

  function showError(err: unknown): void {
    bannerSlot.textContent = "";
    if (err instanceof ApiError) {
      bannerSlot.appendChild(errorBanner(err.code, err.message));
    } else {
      bannerSlot.appendChild(errorBanner("Error", String(err)));
    }
  }

  async function refreshRanking(): Promise<void> {
    const doc = await client.ranking();
    rankingSlot.textContent = "";
    rankingSlot.appendChild(
      rankingTable(doc.rows, (userId) => void showDetail(userId)),
    );
  }

  async function showDetail(userId: string, note?: string): Promise<void> {
    const detail = await client.userDetail(userId);
    detailSlot.textContent = "";
    detailSlot.appendChild(
      detailPanel(detail, knownTemplates(detail), {
        onRefine: (id, templateId) => void doRefine(id, templateId),
      }),
    );
    if (note) {
      const slot = detailSlot.querySelector(".audit-note") as HTMLElement;
      slot.textContent = note;
    }
  }

  async function doRefine(userId: string, templateId: string): Promise<void> {
    if (refineInFlight) return; // one click, one POST
    refineInFlight = true;
    bannerSlot.textContent = "";
    try {
      const result = await client.refine(userId, templateId);
      await showDetail(
        userId,
        `label recorded: observed ${result.observed_type}, ` +
          `new plan ${result.plan.plan_id}`,
      );
      await refreshRanking();
    } catch (err) {
      showError(err);
    } finally {
      refineInFlight = false;
    }
  }

  async function loadExtras(): Promise<void> {
    const doc = await client.proposedClusters();
    const board = clusterBoard(doc.clusters, (edits) => {
      void client
        .confirmClusters(edits)
        .then(() => loadExtras())
        .catch(showError);
    });
    const composer = broadcastComposer((text, filter) => {
      void client.broadcast(text, filter).catch(showError);
    });
    extrasSlot.textContent = "";
    extrasSlot.append(board, composer);
  }

  try {
    await refreshRanking();
    await loadExtras();
  } catch (err) {
    showError(err);
  }
}

const appRoot = document.getElementById("app");
if (appRoot) {
  const token = window.localStorage.getItem("caregiver-token") ?? "";
  const tokenInput = document.getElementById("token") as HTMLInputElement | null;
  if (tokenInput) {
    tokenInput.value = token;
    tokenInput.addEventListener("change", () => {
      window.localStorage.setItem("caregiver-token", tokenInput.value);
      window.location.reload();
    });
  }
  void bootApp(appRoot, createClient({ token: token || undefined }));
}
