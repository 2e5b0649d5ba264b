/** Operator-console state machine. Holds only server-provided state plus
 * the click selection; it never simulates the world locally. */

import { precheckDispatch } from "./precheck";
import {
  type DispatchMsg,
  type HelloMsg,
  type Reason,
  type ServerMsg,
  type SnapshotMsg,
  PROTOCOL_VERSION,
  makeDispatch,
} from "./protocol";

export interface LogEntry {
  at: number; // snapshot time when logged
  text: string;
}

interface PendingCommand {
  robot: number;
  goal: number;
}

export class ViewModel {
  hello: HelloMsg | null = null;
  snapshot: SnapshotMsg | null = null;
  prevSnapshot: SnapshotMsg | null = null;
  selectedRobot: number | null = null;
  log: LogEntry[] = [];
  alerts: string[] = [];
  versionMismatch = false;
  /** REJECT reason to show at the clicked endpoint, keyed by endpoint. */
  inlineRejects = new Map<number, Reason>();
  private pending = new Map<string, PendingCommand>();
  private nextCommand = 1;

  handleMessage(msg: ServerMsg): void {
    if (msg.v !== PROTOCOL_VERSION) {
      this.versionMismatch = true;
      return;
    }
    switch (msg.type) {
      case "HELLO":
        this.hello = msg;
        break;
      case "SNAPSHOT":
        this.prevSnapshot = this.snapshot;
        this.snapshot = msg;
        break;
      case "ACK": {
        const cmd = this.pending.get(String(msg.id));
        this.pending.delete(String(msg.id));
        this.logLine(
          cmd
            ? `robot ${cmd.robot} -> endpoint ${cmd.goal}: accepted`
            : `command ${msg.id}: accepted`,
        );
        break;
      }
      case "REJECT": {
        const cmd = this.pending.get(String(msg.id));
        this.pending.delete(String(msg.id));
        if (cmd) this.inlineRejects.set(cmd.goal, msg.reason);
        this.logLine(
          cmd
            ? `robot ${cmd.robot} -> endpoint ${cmd.goal}: ${msg.reason}`
            : `command ${msg.id}: ${msg.reason}`,
        );
        break;
      }
      case "ALERT":
        this.alerts.push(msg.text);
        break;
    }
  }

  /** Robots that may start the click sequence. */
  robotSelectable(id: number): boolean {
    const r = this.snapshot?.robots[id];
    return r !== undefined && r.state === "Idle";
  }

  /** Endpoints enabled for the current selection, per the precheck. */
  endpointEnabled(index: number): boolean {
    if (this.selectedRobot === null || this.snapshot === null) return false;
    return precheckDispatch(this.selectedRobot, index, this.snapshot) === null;
  }

  /** Robot click: selects when idle, otherwise refuses with a tooltip. */
  clickRobot(id: number): void {
    if (this.robotSelectable(id)) {
      this.selectedRobot = id;
    } else {
      this.logLine(`robot ${id} is not idle`);
    }
  }

  /** Endpoint click: emits a DISPATCH when the precheck passes, else a
   * no-op (disabled endpoints produce no message at all). */
  clickEndpoint(index: number): DispatchMsg | null {
    if (this.selectedRobot === null || this.snapshot === null) return null;
    if (!this.endpointEnabled(index)) return null;
    const id = `op-${this.nextCommand++}`;
    const msg = makeDispatch(id, this.selectedRobot, index);
    this.pending.set(id, { robot: this.selectedRobot, goal: index });
    this.inlineRejects.delete(index);
    this.selectedRobot = null;
    return msg;
  }

  /** Linear interpolation between the last two snapshots, nothing more. */
  robotPosition(id: number, alpha: number): [number, number] {
    const cur = this.snapshot?.robots[id];
    if (!cur) return [0, 0];
    const prev = this.prevSnapshot?.robots[id];
    if (!prev || alpha >= 1) return cur.position;
    return [
      prev.position[0] + (cur.position[0] - prev.position[0]) * alpha,
      prev.position[1] + (cur.position[1] - prev.position[1]) * alpha,
    ];
  }

  private logLine(text: string): void {
    this.log.push({ at: this.snapshot?.t ?? 0, text });
  }
}
