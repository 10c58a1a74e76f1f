// Operator console wiring: one ServiceConnection, one ConsoleState, and the
// panels. All physics lives on the other side of the wire.

import { ServiceConnection } from "./connection";
import { ConsoleState } from "./state";
import { ForceTraceChart } from "./chart";
import { DeformationPanel } from "./panel";
import { validateJogDelta, validateProbeTarget } from "./validate";
import type { Command } from "./types";

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get("service") ?? "http://127.0.0.1:8790";

const state = new ConsoleState(30);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const statusBadge = el<HTMLElement>("status");
const chart = new ForceTraceChart(el<HTMLCanvasElement>("force-chart"));
const panel = new DeformationPanel(el<HTMLElement>("deformation-panel"));
const toast = el<HTMLElement>("toast");
const posReadout = el<HTMLElement>("pos-readout");
const frameImg = el<HTMLImageElement>("frame-view");
const presetSelect = el<HTMLSelectElement>("preset-select");
const probeInput = el<HTMLInputElement>("probe-target");
const controls = Array.from(
  document.querySelectorAll<HTMLButtonElement>("button[data-command]"),
);

const connection = new ServiceConnection(serviceUrl, {
  onTelemetry: (message) => state.ingest(message),
  onStatus: (status) => {
    if (status === "stale") state.markStale();
    if (status === "closed") state.markClosed();
    statusBadge.textContent = status;
    statusBadge.className = `badge ${status}`;
  },
});

function showToast(text: string): void {
  toast.textContent = text;
  toast.classList.add("visible");
  setTimeout(() => toast.classList.remove("visible"), 4000);
}

function setControlsEnabled(enabled: boolean): void {
  for (const button of controls) button.disabled = !enabled;
  presetSelect.disabled = !enabled;
}

async function dispatch(command: Command): Promise<void> {
  if (state.commandInFlight) return;
  const sequence = state.beginCommand();
  setControlsEnabled(false);
  try {
    const ack = await connection.sendCommand(command, sequence);
    state.resolveAck(ack.sequence_number, ack.accepted, ack.reason);
    if (!ack.accepted && ack.reason) {
      showToast(ack.reason); // the server's reason string, verbatim
    }
  } catch (error) {
    state.resolveAck(sequence, false, String(error));
    showToast(`command failed: ${error}`);
  } finally {
    setControlsEnabled(true);
  }
}

for (const button of controls) {
  button.addEventListener("click", () => {
    const kind = button.dataset.command;
    if (kind === "probe") {
      const target = Number(probeInput.value);
      const problem = validateProbeTarget(target);
      if (problem) {
        showToast(problem);
        return;
      }
      void dispatch({ kind: "probe", target_mm: target });
    } else if (kind === "jog-in" || kind === "jog-out") {
      const delta = kind === "jog-in" ? 1.0 : -1.0;
      const problem = validateJogDelta(delta);
      if (problem) {
        showToast(problem);
        return;
      }
      void dispatch({ kind: "jog", delta_mm: delta });
    } else if (kind === "retract") {
      void dispatch({ kind: "retract" });
    } else if (kind === "pause") {
      void dispatch({ kind: "pause" });
    } else if (kind === "resume") {
      void dispatch({ kind: "resume" });
    }
  });
}

presetSelect.addEventListener("change", () => {
  state.selectedPreset = presetSelect.value;
  void dispatch({ kind: "select_tissue", preset: presetSelect.value });
});

// Render loop: chart + panel at display refresh from whatever has arrived.
function render(): void {
  chart.render(state.trace());
  const values = state.display();
  if (values) {
    panel.render(values);
    posReadout.textContent =
      `t=${values.t.toFixed(3)} s  pos=${values.pos.toFixed(3)} mm  ` +
      `cmd=${values.cmd_pos.toFixed(3)} mm`;
  }
  requestAnimationFrame(render);
}

// Frame view polls at 2 Hz; this is inspection imagery, not video.
setInterval(() => {
  frameImg.src = connection.frameUrl();
}, 500);

async function start(): Promise<void> {
  try {
    const presets = await connection.fetchPresets();
    presetSelect.innerHTML = "";
    for (const name of presets) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      presetSelect.appendChild(option);
    }
    const session = await connection.fetchState();
    presetSelect.value = session.tissue_preset;
    state.selectedPreset = session.tissue_preset;
  } catch (error) {
    showToast(`service unreachable at ${serviceUrl}: ${error}`);
  }
  connection.connect();
  requestAnimationFrame(render);
}

void start();
