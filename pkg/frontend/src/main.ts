// Application bootstrap: wires the API client, parameter panel, 3D viewer
// and grid matrix into the page. Every number shown on screen originates
// from an API response; the client never computes geometry itself.

import { ApiClient } from "./api.js";
import { DEFAULT_PARAMS, PARAM_BOUNDS } from "./params.js";
import { ParameterPanel } from "./panel.js";
import { LatestWins } from "./scheduler.js";
import { buildGridMatrix } from "./gridview.js";
import { CloudViewer } from "./viewer.js";
import type { AnomalyParamsUI, ColorMode, GridCell, ViewState } from "./types.js";

const MAX_INTERACTIVE_POINTS = 120_000;

const api = new ApiClient("");
const scheduler = new LatestWins(300);

const canvas = document.getElementById("view") as HTMLCanvasElement;
const legendEl = document.getElementById("legend")!;
const bannerEl = document.getElementById("banner")!;
const fixtureSelect = document.getElementById("fixture") as HTMLSelectElement;
const seedInput = document.getElementById("seed") as HTMLInputElement;
const paramsForm = document.getElementById("params")!;
const reproBox = document.getElementById("repro") as HTMLTextAreaElement;
const copyButton = document.getElementById("copy-repro") as HTMLButtonElement;
const gridButton = document.getElementById("run-grid") as HTMLButtonElement;
const gridContainer = document.getElementById("grid-container")!;
const profilesBar = document.getElementById("profiles")!;

const viewer = new CloudViewer((legend) => {
  legendEl.textContent =
    `effective threshold ${legend.effectiveThreshold.toFixed(4)} | ` +
    `masked ${(legend.maskedFraction * 100).toFixed(2)}% | ` +
    `${legend.count} points`;
});

function showBanner(message: string | null): void {
  bannerEl.textContent = message ?? "";
  bannerEl.classList.toggle("hidden", message === null);
}

function currentStrength(): number {
  return panel.state.params.strength;
}

function requestSynthesize(state: ViewState): void {
  if (!state.fixture) return;
  showBanner(null);
  scheduler.fire(
    () =>
      api.synthesize({
        fixture: state.fixture!,
        seed: state.seed,
        max_points: MAX_INTERACTIVE_POINTS,
        ...state.params,
      }),
    (decoded) => {
      try {
        viewer.setData(decoded, currentStrength());
      } catch (error) {
        showBanner(`payload mismatch: ${String(error)}`);
      }
      reproBox.value = panel.reproCommandLine();
    },
    (error) => showBanner(String(error)),
  );
}

const panel = new ParameterPanel(
  {
    fixture: null,
    params: { ...DEFAULT_PARAMS },
    seed: 7,
    colorMode: "magnitude",
    gridSelection: null,
  },
  {
    requestSynthesize,
    showErrors(errors) {
      for (const input of paramsForm.querySelectorAll<HTMLInputElement>("input[data-param]")) {
        const field = input.dataset.param!;
        const message = errors[field];
        input.classList.toggle("invalid", Boolean(message));
        input.title = message ?? "";
      }
      const named = Object.values(errors);
      showBanner(named.length ? named.join("; ") : null);
    },
  },
  (fire) => scheduler.schedule(async () => fire(), () => undefined),
);

function buildParamInputs(): void {
  const rows: Array<[keyof AnomalyParamsUI, number]> = [
    ["scale", 0.1],
    ["octaves", 1],
    ["persistence", 0.05],
    ["lacunarity", 0.1],
    ["threshold", 0.01],
    ["mask_ratio", 0.01],
    ["strength", 0.005],
    ["grid_res", 1],
    ["knn", 1],
  ];
  for (const [name, step] of rows) {
    const label = document.createElement("label");
    label.textContent = name.replace("_", " ");
    const input = document.createElement("input");
    input.type = "number";
    input.step = String(step);
    input.value = String(panel.state.params[name]);
    input.dataset.param = name;
    const bound = PARAM_BOUNDS[name as keyof typeof PARAM_BOUNDS];
    if (bound?.min !== undefined) input.min = String(bound.min);
    if (bound?.max !== undefined) input.max = String(bound.max);
    input.addEventListener("input", () => {
      const value = Number(input.value);
      panel.setParam(name, (Number.isInteger(step) ? Math.round(value) : value) as never);
      reproBox.value = panel.reproCommandLine();
    });
    label.appendChild(input);
    paramsForm.appendChild(label);
  }

  const modeLabel = document.createElement("label");
  modeLabel.textContent = "coordinate mode";
  const modeSelect = document.createElement("select");
  for (const mode of ["normalized", "physical"]) {
    const option = document.createElement("option");
    option.value = mode;
    option.textContent = mode;
    modeSelect.appendChild(option);
  }
  modeSelect.addEventListener("change", () => {
    panel.setParam("coordinate_mode", modeSelect.value as "normalized" | "physical");
  });
  modeLabel.appendChild(modeSelect);
  paramsForm.appendChild(modeLabel);
}

function refreshParamInputs(): void {
  for (const input of paramsForm.querySelectorAll<HTMLInputElement>("input[data-param]")) {
    const field = input.dataset.param as keyof AnomalyParamsUI;
    input.value = String(panel.state.params[field]);
  }
  seedInput.value = String(panel.state.seed);
  reproBox.value = panel.reproCommandLine();
}

function selectGridCell(cell: GridCell): void {
  if (!cell.synthesize_request) return;
  const req = cell.synthesize_request;
  const params: AnomalyParamsUI = {
    scale: req.scale,
    octaves: req.octaves,
    persistence: req.persistence,
    lacunarity: req.lacunarity,
    coordinate_mode: req.coordinate_mode,
    threshold: req.threshold,
    mask_ratio: req.mask_ratio,
    strength: req.strength,
    grid_res: req.grid_res,
    knn: req.knn,
  };
  panel.loadParams(params, req.seed, [cell.s, cell.o]);
  refreshParamInputs();
  requestSynthesize(panel.state);
}

async function runGrid(): Promise<void> {
  if (!panel.state.fixture) return;
  gridContainer.textContent = "computing 16 cells...";
  try {
    const manifest = await api.grid({
      fixture: panel.state.fixture,
      seed: panel.state.seed,
      persistence: panel.state.params.persistence,
      lacunarity: panel.state.params.lacunarity,
      threshold: panel.state.params.threshold,
      mask_ratio: panel.state.params.mask_ratio,
      grid_res: panel.state.params.grid_res,
      knn: panel.state.params.knn,
    });
    gridContainer.textContent = "";
    gridContainer.appendChild(
      buildGridMatrix(manifest, {
        onSelect: selectGridCell,
        onRetry: (cell, element) => {
          element.textContent = "...";
          api
            .synthesize({
              fixture: manifest.fixture,
              seed: manifest.seed,
              ...panel.state.params,
              scale: cell.s,
              octaves: cell.o,
            })
            .then((decoded) => {
              viewer.setData(decoded, currentStrength());
              element.textContent = "ok";
            })
            .catch((error) => showBanner(String(error)));
        },
      }),
    );
  } catch (error) {
    gridContainer.textContent = "";
    showBanner(String(error));
  }
}

async function bootstrap(): Promise<void> {
  buildParamInputs();

  viewer.attach(canvas);
  const resize = () => {
    const rect = canvas.parentElement!.getBoundingClientRect();
    viewer.resize(rect.width, rect.height);
  };
  window.addEventListener("resize", resize);
  resize();

  for (const button of document.querySelectorAll<HTMLButtonElement>("[data-color-mode]")) {
    button.addEventListener("click", () => {
      // recolor client-side; no new request
      viewer.setColorMode(button.dataset.colorMode as ColorMode);
    });
  }

  seedInput.value = String(panel.state.seed);
  seedInput.addEventListener("change", () => {
    panel.setSeed(Number(seedInput.value));
    reproBox.value = panel.reproCommandLine();
  });

  copyButton.addEventListener("click", () => {
    void navigator.clipboard?.writeText(reproBox.value);
  });
  gridButton.addEventListener("click", () => void runGrid());

  try {
    const profiles = await api.profiles();
    for (const profile of profiles) {
      const button = document.createElement("button");
      button.textContent = String(profile.name);
      button.addEventListener("click", () => {
        const { name: _name, ...fields } = profile;
        panel.loadParams(fields as unknown as AnomalyParamsUI, panel.state.seed, null);
        refreshParamInputs();
        requestSynthesize(panel.state);
      });
      profilesBar.appendChild(button);
    }

    const clouds = await api.clouds();
    for (const name of clouds) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      fixtureSelect.appendChild(option);
    }
    fixtureSelect.addEventListener("change", () => {
      panel.setFixture(fixtureSelect.value);
      requestSynthesize(panel.state);
    });
    if (clouds.length > 0) {
      fixtureSelect.value = clouds[0];
      panel.setFixture(clouds[0]);
      requestSynthesize(panel.state);
    } else {
      showBanner("no fixtures available; start the server with --fixtures <dir>");
    }
  } catch (error) {
    showBanner(`server unreachable: ${String(error)}`);
  }
}

void bootstrap();
