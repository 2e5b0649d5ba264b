/** Client-side dispatch precheck on the latest snapshot.
 *
 * Must never accept a command the server would reject for RobotBusy or
 * DestinationConflict given the same state; tested against recorded
 * server verdicts. The conflict rule is flag-based: an endpoint that is
 * occupied (a parked robot stands there) or assigned (some robot is
 * already heading there) is not a legal destination.
 */

import type { Reason, SnapshotMsg } from "./protocol";

export function precheckDispatch(
  robot: number,
  goal: number,
  snapshot: SnapshotMsg,
): Reason | null {
  if (
    !Number.isInteger(robot) ||
    robot < 0 ||
    robot >= snapshot.robots.length
  ) {
    return "UnknownRobot";
  }
  if (
    !Number.isInteger(goal) ||
    goal < 0 ||
    goal >= snapshot.endpoints.length
  ) {
    return "UnknownEndpoint";
  }
  const r = snapshot.robots[robot];
  if (r.state === "Failed") return "RobotFailed";
  if (r.state !== "Idle") return "RobotBusy";
  const e = snapshot.endpoints[goal];
  if (e.occupied || e.assigned) return "DestinationConflict";
  return null;
}
