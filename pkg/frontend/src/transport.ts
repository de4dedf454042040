/** Websocket client with a reconnect banner; state freezes while disconnected. */

import { Envelope } from "./protocol.js";

export interface Transport {
  send(msg: Envelope): void;
  close(): void;
}

export interface TransportHooks {
  onEvent(event: Envelope): void;
  onOpen(): void;
  onClose(): void;
}

export function connect(url: string, hooks: TransportHooks): Transport {
  let socket: WebSocket | null = null;
  let closed = false;

  const open = () => {
    socket = new WebSocket(url);
    socket.onopen = () => hooks.onOpen();
    socket.onmessage = (msg: MessageEvent<string>) => {
      try {
        hooks.onEvent(JSON.parse(msg.data) as Envelope);
      } catch (err) {
        console.error("bad server event", err);
      }
    };
    socket.onclose = () => {
      hooks.onClose();
      if (!closed) {
        setTimeout(open, 1500);
      }
    };
    socket.onerror = () => socket?.close();
  };
  open();

  return {
    send(msg: Envelope) {
      if (socket && socket.readyState === WebSocket.OPEN) {
        socket.send(JSON.stringify(msg));
      }
    },
    close() {
      closed = true;
      socket?.close();
    },
  };
}
