/** Browser entry point: connects to the live service, renders at
 * snapshot rate, and translates canvas clicks into the robot-then-
 * endpoint dispatch sequence. */

import { Client } from "./client";
import { Transform, render } from "./render";
import { ViewModel } from "./viewmodel";

const params = new URLSearchParams(location.search);
const url =
  params.get("ws") ?? `ws://${location.hostname}:${location.port || 8000}/ws`;

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const status = document.getElementById("status") as HTMLElement;
const ctx = canvas.getContext("2d")!;
const vm = new ViewModel();
const client = new Client(new WebSocket(url), vm);

let tf: Transform | null = null;
let lastSnapshotAt = performance.now();
let snapshotPeriod = 100;

function frame(): void {
  if (vm.hello && !tf) {
    tf = Transform.fit(
      vm.hello.map.workspace.outer,
      canvas.width,
      canvas.height,
    );
  }
  if (tf) {
    const alpha = Math.min(
      1,
      (performance.now() - lastSnapshotAt) / snapshotPeriod,
    );
    render(ctx, vm, tf, canvas.width, canvas.height, alpha);
  }
  status.textContent = vm.log
    .slice(-6)
    .map((l) => `[${l.at.toFixed(1)}s] ${l.text}`)
    .join("\n");
  requestAnimationFrame(frame);
}

const origHandle = vm.handleMessage.bind(vm);
vm.handleMessage = (msg) => {
  if (msg.type === "SNAPSHOT") {
    const now = performance.now();
    snapshotPeriod = Math.max(16, now - lastSnapshotAt);
    lastSnapshotAt = now;
  }
  origHandle(msg);
};

canvas.addEventListener("click", (ev) => {
  if (!tf || !vm.hello || !vm.snapshot) return;
  const rect = canvas.getBoundingClientRect();
  const cx = ev.clientX - rect.left;
  const cy = ev.clientY - rect.top;

  for (const r of vm.snapshot.robots) {
    const [x, y] = r.position;
    const radius = vm.hello.robots[r.id].radius * tf.scale;
    if (Math.hypot(tf.x(x) - cx, tf.y(y) - cy) <= radius + 4) {
      client.clickRobot(r.id);
      return;
    }
  }
  if (vm.selectedRobot === null) return;
  for (const [i, p] of vm.hello.map.endpoints.entries()) {
    if (Math.hypot(tf.x(p[0]) - cx, tf.y(p[1]) - cy) <= 9) {
      client.clickEndpoint(i);
      return;
    }
  }
});

requestAnimationFrame(frame);
