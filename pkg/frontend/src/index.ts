export { CSV_COLUMNS, ReportRow, readReportCsv, readReportCsvs } from "./csv.js";
export {
  FIGURE_KINDS,
  FigureKind,
  FigureSpec,
  MarginGroup,
  buildFigure,
  convergence,
  marginVsT,
  mixingDecay,
  render,
  residualVsDt,
} from "./figures.js";
export { PALETTE, PlotSpec, Series, renderPlot } from "./svg.js";
