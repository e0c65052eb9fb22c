/** Payload shapes of the /api surface.  Every number here is produced by
 * the server library; the UI only scales them for drawing. */

export interface BqsReadout {
  score: number;
  mean: number;
  slope: number;
  variance: number;
  symmetry: number;
}

export interface KnotTable {
  k: number[];
  y: number[];
}

export interface BackgroundPayload {
  engine: "spline" | "poly";
  e0: number;
  edge_step: number;
  energy: number[];
  mu: number[];
  s_post: number[];
  s_post_energy: number[];
  norm: number[];
  k: number[];
  chi_k3: number[];
  bqs: BqsReadout;
  knots?: KnotTable;
}

export interface FtPayload {
  weight: number;
  k: number[];
  chi_weighted: number[];
  chi_filtered: number[];
  r: number[];
  magnitude: number[];
  real: number[];
  imag: number[];
  magnitude_filtered: number[];
}

export interface SessionCreated {
  id: string;
  report: Record<string, unknown>;
  labels: string[];
  energy: number[];
  mu: number[];
  e0: number;
}

export interface Snapshot {
  id: string;
  report: Record<string, unknown>;
  config: Record<string, unknown>;
  knot_y_override: number[] | null;
  background: BackgroundPayload;
  ft: FtPayload;
}

export interface ColumnOverride {
  energy: number;
  i0?: number;
  it?: number;
  i_fluor?: number[];
  mu?: number;
  mode?: "transmission" | "fluorescence";
}

export interface WindowUpdate {
  kind?: "hanning" | "kaiser";
  k_min?: number;
  k_max?: number;
  dk?: number;
  alpha?: number;
}

export interface FtUpdate {
  weight?: number;
  r_max?: number;
  r_bkg?: number;
  window?: WindowUpdate;
}

export interface BackgroundUpdate {
  engine?: "spline" | "poly";
  r_bkg?: number;
  f_range?: number;
  hi_weight?: number;
  densify?: number;
  knot_y?: number[] | null;
}

export type Stage = "raw" | "normalized" | "chi-k" | "r-space";
export type RTrace = "magnitude" | "real" | "imag";
