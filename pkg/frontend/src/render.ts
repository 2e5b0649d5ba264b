/** Immediate-mode scene drawing. Redraws everything from the latest
 * snapshot each call; the only client-side motion is linear interpolation
 * between the last two snapshots (handled by the view model).
 *
 * Takes a minimal 2D-context interface so tests can substitute a
 * recording fake. All geometry is in meters; `Transform` owns the
 * meters-to-pixels mapping.
 */

import type { ViewModel } from "./viewmodel";

export interface Ctx2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
}

export class Transform {
  constructor(
    public scale: number,
    public ox: number,
    public oy: number,
    public canvasHeight: number,
  ) {}

  /** World y grows up, canvas y grows down. */
  x(wx: number): number {
    return this.ox + wx * this.scale;
  }
  y(wy: number): number {
    return this.canvasHeight - (this.oy + wy * this.scale);
  }

  static fit(
    outer: [number, number][],
    width: number,
    height: number,
    margin = 20,
  ): Transform {
    const xs = outer.map((p) => p[0]);
    const ys = outer.map((p) => p[1]);
    const w = Math.max(...xs) - Math.min(...xs);
    const h = Math.max(...ys) - Math.min(...ys);
    const scale = Math.min(
      (width - 2 * margin) / w,
      (height - 2 * margin) / h,
    );
    return new Transform(
      scale,
      margin - Math.min(...xs) * scale,
      margin - Math.min(...ys) * scale,
      height,
    );
  }
}

function ring(ctx: Ctx2D, tf: Transform, pts: [number, number][]): void {
  ctx.moveTo(tf.x(pts[0][0]), tf.y(pts[0][1]));
  for (let i = 1; i < pts.length; i++) {
    ctx.lineTo(tf.x(pts[i][0]), tf.y(pts[i][1]));
  }
  ctx.closePath();
}

export function render(
  ctx: Ctx2D,
  vm: ViewModel,
  tf: Transform,
  width: number,
  height: number,
  alpha = 1,
): void {
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#20242b";
  ctx.fillRect(0, 0, width, height);
  if (vm.versionMismatch) {
    ctx.fillStyle = "#c33";
    ctx.fillRect(0, 0, width, 28);
    ctx.fillStyle = "#fff";
    ctx.fillText("protocol version mismatch", 8, 19);
    return;
  }
  if (!vm.hello) return;

  // workspace: free space light, holes back to background
  const ws = vm.hello.map.workspace;
  ctx.fillStyle = "#e9e6df";
  ctx.beginPath();
  ring(ctx, tf, ws.outer);
  ctx.fill();
  ctx.fillStyle = "#20242b";
  for (const hole of ws.holes ?? []) {
    ctx.beginPath();
    ring(ctx, tf, hole);
    ctx.fill();
  }

  // roadmap in a muted tone
  ctx.strokeStyle = "#b8b4aa";
  ctx.lineWidth = 1;
  ctx.globalAlpha = 0.7;
  const verts = vm.hello.roadmap.vertices;
  ctx.beginPath();
  for (const [i, j] of vm.hello.roadmap.edges) {
    ctx.moveTo(tf.x(verts[i][0]), tf.y(verts[i][1]));
    ctx.lineTo(tf.x(verts[j][0]), tf.y(verts[j][1]));
  }
  ctx.stroke();
  ctx.globalAlpha = 1;

  const snap = vm.snapshot;

  // endpoints highlighted; disabled ones dimmed while a robot is selected
  for (const [i, p] of vm.hello.map.endpoints.entries()) {
    const enabled =
      vm.selectedRobot === null ? true : vm.endpointEnabled(i);
    ctx.globalAlpha = enabled ? 1 : 0.35;
    ctx.fillStyle = "#c0392b";
    ctx.beginPath();
    ctx.arc(tf.x(p[0]), tf.y(p[1]), 5, 0, 2 * Math.PI);
    ctx.fill();
    const reason = vm.inlineRejects.get(i);
    if (reason) {
      ctx.globalAlpha = 1;
      ctx.fillStyle = "#c0392b";
      ctx.fillText(reason, tf.x(p[0]) + 8, tf.y(p[1]) - 8);
    }
    void snap;
  }
  ctx.globalAlpha = 1;

  if (snap) {
    // committed trajectories first, fading along remaining time
    for (const r of snap.robots) {
      if (r.state !== "Executing" || !r.trajectory) continue;
      const wps = r.trajectory.waypoints.filter((w) => w[2] >= snap.t);
      if (wps.length === 0) continue;
      const span = Math.max(wps[wps.length - 1][2] - snap.t, 1e-9);
      const pos = vm.robotPosition(r.id, alpha);
      let from: [number, number] = [pos[0], pos[1]];
      ctx.strokeStyle = "#2980d9";
      ctx.lineWidth = 2;
      for (const [x, y, t] of wps) {
        ctx.globalAlpha = Math.max(0.15, 1 - (t - snap.t) / span);
        ctx.beginPath();
        ctx.moveTo(tf.x(from[0]), tf.y(from[1]));
        ctx.lineTo(tf.x(x), tf.y(y));
        ctx.stroke();
        from = [x, y];
      }
      ctx.globalAlpha = 1;
    }

    // robots as discs at true radius
    for (const r of snap.robots) {
      const roster = vm.hello.robots[r.id];
      const [x, y] = vm.robotPosition(r.id, alpha);
      ctx.fillStyle =
        r.state === "Failed"
          ? "#7f8c8d"
          : r.state === "Executing"
            ? "#2980d9"
            : "#27ae60";
      ctx.beginPath();
      ctx.arc(tf.x(x), tf.y(y), roster.radius * tf.scale, 0, 2 * Math.PI);
      ctx.fill();
      if (vm.selectedRobot === r.id) {
        ctx.strokeStyle = "#f1c40f";
        ctx.lineWidth = 2;
        ctx.stroke();
      }
      ctx.fillStyle = "#fff";
      ctx.fillText(String(r.id), tf.x(x) - 3, tf.y(y) + 4);
    }
  }

  // persistent alert banner
  if (vm.alerts.length > 0) {
    ctx.fillStyle = "#c0392b";
    ctx.fillRect(0, 0, width, 28);
    ctx.fillStyle = "#fff";
    ctx.fillText(vm.alerts[vm.alerts.length - 1], 8, 19);
  }
}
