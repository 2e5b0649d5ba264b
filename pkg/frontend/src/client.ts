/** WebSocket plumbing: feeds server messages to the view model in
 * arrival order and sends the dispatches it emits. */

import type { DispatchMsg, ServerMsg } from "./protocol";
import type { ViewModel } from "./viewmodel";

export interface SocketLike {
  send(data: string): void;
  addEventListener(type: "message", cb: (ev: { data: string }) => void): void;
}

export class Client {
  constructor(
    private sock: SocketLike,
    readonly vm: ViewModel,
  ) {
    sock.addEventListener("message", (ev) => {
      vm.handleMessage(JSON.parse(ev.data) as ServerMsg);
    });
  }

  clickRobot(id: number): void {
    this.vm.clickRobot(id);
  }

  clickEndpoint(index: number): DispatchMsg | null {
    const msg = this.vm.clickEndpoint(index);
    if (msg) this.sock.send(JSON.stringify(msg));
    return msg;
  }
}
