// Deformation panel: four class-probability bars, the deformation gauge,
// and the current class name. Values land in the DOM exactly as they came
// off the wire (formatting only pads digits, never recomputes).

import type { DisplayValues } from "./state";
import { CLASS_NAMES } from "./types";

export class DeformationPanel {
  private bars: HTMLElement[] = [];
  private barLabels: HTMLElement[] = [];
  private gaugeFill: HTMLElement;
  private gaugeLabel: HTMLElement;
  private classLabel: HTMLElement;

  constructor(root: HTMLElement) {
    const barsBox = root.querySelector(".prob-bars") as HTMLElement;
    for (const name of CLASS_NAMES) {
      const row = document.createElement("div");
      row.className = "prob-row";
      const tag = document.createElement("span");
      tag.className = "prob-tag";
      tag.textContent = name;
      const track = document.createElement("div");
      track.className = "prob-track";
      const fill = document.createElement("div");
      fill.className = "prob-fill";
      track.appendChild(fill);
      const value = document.createElement("span");
      value.className = "prob-value";
      value.textContent = "0.0000";
      row.append(tag, track, value);
      barsBox.appendChild(row);
      this.bars.push(fill);
      this.barLabels.push(value);
    }
    this.gaugeFill = root.querySelector(".gauge-fill") as HTMLElement;
    this.gaugeLabel = root.querySelector(".gauge-label") as HTMLElement;
    this.classLabel = root.querySelector(".class-label") as HTMLElement;
  }

  render(values: DisplayValues): void {
    values.class_probs.forEach((p, i) => {
      this.bars[i].style.width = `${(p * 100).toFixed(2)}%`;
      this.barLabels[i].textContent = p.toFixed(4);
    });
    this.gaugeFill.style.width = `${Math.min(values.deformation_pct, 100).toFixed(2)}%`;
    this.gaugeLabel.textContent = `${values.deformation_pct.toFixed(2)} %`;
    this.classLabel.textContent = values.class;
  }
}
