/** Per-trial rating state: sliders start unset, and submission requires
 * every stimulus to have been played at least once and every slider moved. */

export interface StimulusState {
  handle: string;
  score: number | null;
  played: boolean;
}

export class TrialState {
  readonly stimuli: StimulusState[];

  constructor(handles: string[]) {
    if (handles.length === 0) {
      throw new Error("trial has no stimuli");
    }
    this.stimuli = handles.map((handle) => ({
      handle,
      score: null,
      played: false,
    }));
  }

  private find(handle: string): StimulusState {
    const state = this.stimuli.find((s) => s.handle === handle);
    if (!state) throw new Error(`unknown stimulus ${handle}`);
    return state;
  }

  markPlayed(handle: string): void {
    this.find(handle).played = true;
  }

  setScore(handle: string, value: number): void {
    if (!Number.isInteger(value) || value < 0 || value > 100) {
      throw new Error(`score must be an integer in [0, 100], got ${value}`);
    }
    this.find(handle).score = value;
  }

  get allPlayed(): boolean {
    return this.stimuli.every((s) => s.played);
  }

  get allScored(): boolean {
    return this.stimuli.every((s) => s.score !== null);
  }

  /** Submit is allowed only when everything was played and scored. */
  get complete(): boolean {
    return this.allPlayed && this.allScored;
  }

  scores(): Record<string, number> {
    if (!this.complete) {
      throw new Error("trial is not complete");
    }
    const out: Record<string, number> = {};
    for (const s of this.stimuli) out[s.handle] = s.score as number;
    return out;
  }
}
