// Keyboard gesture surrogates: four bindings map to the four gesture
// intensities. A held key is intensity 1, release returns it to 0; the
// control pipeline responds to rising edges, so drivers pump the keys the
// way shirt wearers pump their movements. Messages go out on a fixed timer
// independent of rendering.

import { Gesture, Intensities, gestureFrame } from "./protocol.js";

export const DEFAULT_BINDINGS: Record<string, Gesture> = {
  ArrowUp: "right_elbow_flex", // speed up
  ArrowDown: "left_elbow_flex", // slow down
  ArrowLeft: "right_shoulder_protract", // turn left (CCW)
  ArrowRight: "left_shoulder_protract", // turn right (CW)
};

export class GestureInput {
  private held = new Set<Gesture>();

  constructor(private bindings: Record<string, Gesture> = DEFAULT_BINDINGS) {}

  keyDown(key: string): boolean {
    const g = this.bindings[key];
    if (!g) return false;
    this.held.add(g);
    return true;
  }

  keyUp(key: string): boolean {
    const g = this.bindings[key];
    if (!g) return false;
    this.held.delete(g);
    return true;
  }

  /** Current intensity map; held keys are 1, everything else omitted (0). */
  intensities(): Intensities {
    const out: Intensities = {};
    for (const g of this.held) out[g] = 1.0;
    return out;
  }

  frame(): string {
    return gestureFrame(this.intensities());
  }

  /** Attach to a DOM target and emit one gesture frame per `periodMs`. */
  attach(target: EventTarget, send: (frame: string) => void,
         periodMs: number): () => void {
    const down = (ev: Event) => {
      if (this.keyDown((ev as KeyboardEvent).key)) ev.preventDefault();
    };
    const up = (ev: Event) => {
      if (this.keyUp((ev as KeyboardEvent).key)) ev.preventDefault();
    };
    target.addEventListener("keydown", down);
    target.addEventListener("keyup", up);
    const timer = setInterval(() => send(this.frame()), periodMs);
    return () => {
      target.removeEventListener("keydown", down);
      target.removeEventListener("keyup", up);
      clearInterval(timer);
    };
  }
}
