/** Wire types for the live coordination service. Mirrors the JSON schema
 * exactly; every message carries a protocol version field "v". */

export const PROTOCOL_VERSION = 1;

export type Reason =
  | "UnknownRobot"
  | "UnknownEndpoint"
  | "RobotBusy"
  | "RobotFailed"
  | "DestinationConflict";

export interface TrajectoryJson {
  depart: number;
  waypoints: [number, number, number][]; // [x, y, t]
}

export interface RosterEntry {
  id: number;
  endpoint: number;
  radius: number;
  v_max: number;
}

export interface HelloMsg {
  v: number;
  type: "HELLO";
  map: {
    name?: string;
    workspace: { outer: [number, number][]; holes?: [number, number][][] };
    endpoints: [number, number][];
    [key: string]: unknown;
  };
  roadmap: { vertices: [number, number][]; edges: [number, number][] };
  robots: RosterEntry[];
}

export type RobotState = "Idle" | "Executing" | "Failed";

export interface RobotView {
  id: number;
  position: [number, number];
  state: RobotState;
  goal: number | null;
  trajectory: TrajectoryJson | null;
}

export interface EndpointView {
  index: number;
  position: [number, number];
  occupied: boolean;
  assigned: boolean;
}

export interface SnapshotMsg {
  v: number;
  type: "SNAPSHOT";
  t: number;
  robots: RobotView[];
  endpoints: EndpointView[];
  monitors: Record<string, boolean>;
}

export interface AckMsg {
  v: number;
  type: "ACK";
  id: string | number;
}

export interface RejectMsg {
  v: number;
  type: "REJECT";
  id: string | number;
  reason: Reason;
}

export interface AlertMsg {
  v: number;
  type: "ALERT";
  text: string;
}

export type ServerMsg = HelloMsg | SnapshotMsg | AckMsg | RejectMsg | AlertMsg;

export interface DispatchMsg {
  v: number;
  type: "DISPATCH";
  id: string;
  robot: number;
  goal: number;
}

export function makeDispatch(
  id: string,
  robot: number,
  goal: number,
): DispatchMsg {
  return { v: PROTOCOL_VERSION, type: "DISPATCH", id, robot, goal };
}
