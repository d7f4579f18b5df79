// Cockpit entry point. Socket messages are queued and applied only at
// frame start, so state mutation never races the renderer; operator input
// is sampled and sent on a fixed 25 Hz timer with an explicit zero action
// fired on blur, visibility loss, or gamepad disconnect.

import { InputTracker, axesToAction, ZERO_AXES } from "./input";
import { actionMessage, parseMessage } from "./protocol";
import { Renderer } from "./render";
import { CockpitState } from "./state";

const SEND_PERIOD_MS = 40; // 25 Hz >= the 20 Hz contract

function wsUrl(): string {
  const q = new URLSearchParams(location.search).get("ws");
  return q ?? `ws://${location.hostname || "127.0.0.1"}:8765`;
}

function main(): void {
  const canvas = document.getElementById("cockpit") as HTMLCanvasElement;
  const renderer = new Renderer(canvas);
  const state = new CockpitState();
  const input = new InputTracker();
  const url = wsUrl();
  const inbox: string[] = [];
  let socket: WebSocket | null = null;
  let connected = false;
  let frameMs = 16;
  let lastFrame = performance.now();
  let gamepadIndex: number | null = null;

  function connect(): void {
    socket = new WebSocket(url);
    socket.onopen = () => { connected = true; };
    socket.onclose = () => {
      connected = false;
      setTimeout(connect, 1000);
    };
    socket.onerror = () => socket?.close();
    socket.onmessage = (ev) => {
      if (typeof ev.data === "string") inbox.push(ev.data);
    };
  }
  connect();

  function sendZeroAction(): void {
    if (socket && socket.readyState === WebSocket.OPEN) {
      socket.send(actionMessage(0, 0, 0, 0));
    }
  }

  // input fail-safe: explicit zero before going silent
  window.addEventListener("blur", () => {
    input.releaseAll();
    sendZeroAction();
  });
  document.addEventListener("visibilitychange", () => {
    if (document.hidden) {
      input.releaseAll();
      sendZeroAction();
    }
  });
  window.addEventListener("keydown", (e) => input.keyDown(e.code));
  window.addEventListener("keyup", (e) => input.keyUp(e.code));
  window.addEventListener("gamepadconnected", (e) => {
    gamepadIndex = e.gamepad.index;
  });
  window.addEventListener("gamepaddisconnected", (e) => {
    if (gamepadIndex === e.gamepad.index) {
      gamepadIndex = null;
      sendZeroAction();
    }
  });

  setupVirtualJoystick(input);

  setInterval(() => {
    if (!socket || socket.readyState !== WebSocket.OPEN) return;
    const pad = gamepadIndex !== null
      ? navigator.getGamepads()[gamepadIndex]?.axes ?? null : null;
    const axes = document.hidden ? ZERO_AXES : input.sample(pad);
    const grid = state.config?.grid;
    if (!grid) return;
    const a = axesToAction(axes, grid);
    socket.send(actionMessage(a.vx, a.vz, a.omega, a.rot));
  }, SEND_PERIOD_MS);

  function frame(): void {
    const now = performance.now();
    frameMs = frameMs * 0.9 + (now - lastFrame) * 0.1;
    lastFrame = now;
    // drain the message queue before touching state (single mutation point)
    for (const raw of inbox.splice(0, inbox.length)) {
      const msg = parseMessage(raw);
      if (msg) state.apply(msg);
    }
    renderer.draw(state, { frameMs, connected, wsUrl: url });
    requestAnimationFrame(frame);
  }
  requestAnimationFrame(frame);
}

function setupVirtualJoystick(input: InputTracker): void {
  const pad = document.getElementById("vjoy");
  const knob = document.getElementById("vjoy-knob");
  if (!pad || !knob) return;
  const radius = 50;
  let active = false;

  function update(ev: PointerEvent): void {
    const rect = pad!.getBoundingClientRect();
    const dx = ev.clientX - (rect.left + rect.width / 2);
    const dy = ev.clientY - (rect.top + rect.height / 2);
    const mag = Math.hypot(dx, dy);
    const clamped = Math.min(mag, radius);
    const nx = mag > 0 ? (dx / mag) * clamped : 0;
    const ny = mag > 0 ? (dy / mag) * clamped : 0;
    knob!.style.transform = `translate(${nx}px, ${ny}px)`;
    input.virtual = {
      forward: -ny / radius,
      turn: -nx / radius,
      vertical: 0,
      rot: 0,
    };
  }

  function release(): void {
    active = false;
    knob!.style.transform = "translate(0px, 0px)";
    input.virtual = { ...ZERO_AXES };
  }

  pad.addEventListener("pointerdown", (ev) => {
    active = true;
    pad.setPointerCapture(ev.pointerId);
    update(ev);
  });
  pad.addEventListener("pointermove", (ev) => {
    if (active) update(ev);
  });
  pad.addEventListener("pointerup", release);
  pad.addEventListener("pointercancel", release);
}

main();
