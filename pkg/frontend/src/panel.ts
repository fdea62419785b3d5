// Parameter panel state: field edits validate against the shared bounds,
// valid edits schedule a debounced synthesize request, and the current
// (params, seed, fixture) triple is always available as a copyable CLI
// reproduction command.

import { reproCommand, validateParams } from "./params.js";
import type { AnomalyParamsUI, ViewState } from "./types.js";

export interface PanelCallbacks {
  /** Called with a fully valid state after the debounce window. */
  requestSynthesize(state: ViewState): void;
  /** Called with field -> violated invariant whenever validation fails. */
  showErrors(errors: Record<string, string>): void;
}

export class ParameterPanel {
  constructor(
    public state: ViewState,
    private readonly callbacks: PanelCallbacks,
    private readonly scheduleRequest: (fire: () => void) => void,
  ) {}

  /** Apply one field edit; blocked client-side when out of bounds. */
  setParam<K extends keyof AnomalyParamsUI>(name: K, value: AnomalyParamsUI[K]): boolean {
    const candidate = { ...this.state.params, [name]: value };
    const errors = validateParams(candidate);
    if (Object.keys(errors).length > 0) {
      this.callbacks.showErrors(errors);
      return false;
    }
    this.state = { ...this.state, params: candidate };
    this.callbacks.showErrors({});
    this.scheduleRequest(() => this.callbacks.requestSynthesize(this.state));
    return true;
  }

  setSeed(seed: number): boolean {
    if (!Number.isInteger(seed) || seed < 0) {
      this.callbacks.showErrors({ seed: "seed must be a non-negative integer" });
      return false;
    }
    this.state = { ...this.state, seed };
    this.callbacks.showErrors({});
    this.scheduleRequest(() => this.callbacks.requestSynthesize(this.state));
    return true;
  }

  setFixture(fixture: string): void {
    this.state = { ...this.state, fixture };
    this.scheduleRequest(() => this.callbacks.requestSynthesize(this.state));
  }

  /** Replace all parameters at once (grid-cell click); no validation loss. */
  loadParams(params: AnomalyParamsUI, seed: number, gridSelection: [number, number] | null): void {
    this.state = { ...this.state, params, seed, gridSelection };
  }

  reproCommandLine(): string {
    return reproCommand(
      this.state.fixture ?? "<cloud>",
      this.state.params,
      this.state.seed,
    );
  }
}
