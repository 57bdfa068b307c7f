#include "ekflow/plot.hpp"

#include "ekflow/output.hpp"
#include "ekflow/snapshot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace ekflow {

namespace fs = std::filesystem;

namespace {

using Rgb = std::array<unsigned char, 3>;

Rgb lerp_stops(const std::vector<std::array<double, 3>>& stops, double s) {
  s = std::clamp(s, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t k = std::min(static_cast<std::size_t>(s), stops.size() - 2);
  const double a = s - k;
  Rgb c;
  for (int i = 0; i < 3; ++i) c[i] = static_cast<unsigned char>(std::lround(255 * ((1 - a) * stops[k][i] + a * stops[k + 1][i])));
  return c;
}

const std::vector<std::array<double, 3>> kSequential = {
    {0.267, 0.005, 0.329}, {0.230, 0.322, 0.546}, {0.128, 0.567, 0.551}, {0.369, 0.789, 0.383}, {0.993, 0.906, 0.144}};
const std::vector<std::array<double, 3>> kDiverging = {
    {0.230, 0.299, 0.754}, {0.865, 0.865, 0.865}, {0.706, 0.016, 0.150}};

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

void save(const fs::path& p, const std::string& bytes, std::vector<std::string>& written) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FormatError("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  written.push_back(p.string());
}

}  // namespace

std::string heatmap_ppm(const ScalarField& f, Colormap cmap, int scale) {
  const int nx = static_cast<int>(f.rows()), ny = static_cast<int>(f.cols());
  scale = std::max(scale, 1);
  const int W = nx * scale, H = ny * scale;
  double lo = f.minCoeff(), hi = f.maxCoeff();
  if (cmap == Colormap::Diverging) {
    hi = std::max(std::abs(lo), std::abs(hi));
    lo = -hi;
  }
  const double span = hi > lo ? hi - lo : 1;
  std::string out = "P6\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
  out.reserve(out.size() + 3 * std::size_t(W) * H);
  for (int py = 0; py < H; ++py) {
    const int j = ny - 1 - py / scale;
    for (int px = 0; px < W; ++px) {
      const double s = (f(px / scale, j) - lo) / span;
      const Rgb c = lerp_stops(cmap == Colormap::Diverging ? kDiverging : kSequential, std::isfinite(s) ? s : 0);
      out.append(reinterpret_cast<const char*>(c.data()), 3);
    }
  }
  return out;
}

std::string timeseries_svg(const std::string& title, const std::vector<Scalar>& x, const std::vector<Series>& ys) {
  const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  double x0 = x.empty() ? 0 : *std::min_element(x.begin(), x.end());
  double x1 = x.empty() ? 1 : *std::max_element(x.begin(), x.end());
  double y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : ys)
    for (double v : s.second)
      if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
  if (!(y1 >= y0)) y0 = 0, y1 = 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  if (x1 == x0) x1 = x0 + 1;
  auto X = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto Y = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" + title + "</text>\n";
  s += "<rect x=\"" + fmt(L) + "\" y=\"" + fmt(T) + "\" width=\"" + fmt(W - L - R) + "\" height=\"" + fmt(H - T - B) +
       "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = y0 + k * (y1 - y0) / 4, xv = x0 + k * (x1 - x0) / 4;
    s += "<text x=\"" + fmt(L - 6) + "\" y=\"" + fmt(Y(yv) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(yv) + "</text>\n";
    s += "<text x=\"" + fmt(X(xv)) + "\" y=\"" + fmt(H - B + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(xv) + "</text>\n";
  }
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const auto& [name, v] = ys[k];
    std::string pts;
    for (std::size_t i = 0; i < std::min(x.size(), v.size()); ++i)
      if (std::isfinite(v[i])) pts += fmt(X(x[i])) + "," + fmt(Y(v[i])) + " ";
    const char* c = colors[k % 6];
    s += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    s += "<text x=\"" + fmt(L + 10) + "\" y=\"" + fmt(T + 16 + 14 * k) + "\" fill=\"" + c +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + name + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::vector<std::string> plot_run(const std::string& run_dir) {
  const fs::path dir(run_dir), out = dir / "plots";
  std::vector<fs::path> snaps;
  if (fs::exists(dir / "snapshots"))
    for (const auto& e : fs::directory_iterator(dir / "snapshots"))
      if (e.path().extension() == ".snap") snaps.push_back(e.path());
  std::sort(snaps.begin(), snaps.end());
  if (snaps.empty()) throw FormatError("no snapshots in " + (dir / "snapshots").string());
  const CsvTable table = read_csv((dir / "diagnostics.csv").string());
  fs::create_directories(out);

  std::vector<std::string> written;
  const Snapshot snap = read_snapshot(snaps.back().string());
  const int scale = std::max(1, 512 / std::max(snap.grid.nx, snap.grid.ny));
  save(out / "psi.ppm", heatmap_ppm(snap.array("psi"), Colormap::Diverging, scale), written);
  save(out / "rho.ppm", heatmap_ppm(snap.array("rho"), Colormap::Diverging, scale), written);
  {
    const ScalarField& u = snap.array("u");
    const ScalarField& v = snap.array("v");
    const int nx = snap.grid.nx, ny = snap.grid.ny;
    const ScalarField uc = (u.topRows(nx) + u.bottomRows(nx)) / 2, vc = (v.leftCols(ny) + v.rightCols(ny)) / 2;
    save(out / "speed.ppm", heatmap_ppm((uc.square() + vc.square()).sqrt(), Colormap::Sequential, scale), written);
  }
  const int ns = static_cast<int>(snap.scalar("n_species"));
  for (int i = 0; i < ns; ++i) {
    const std::string name = "N" + std::to_string(i);
    save(out / (name + ".ppm"), heatmap_ppm(snap.array(name), Colormap::Sequential, scale), written);
  }

  const auto t = table.column("t");
  save(out / "energy.svg",
       timeseries_svg("energy", t, {{"E_k", table.column("E_k")}, {"E_d", table.column("E_d")}, {"E_p", table.column("E_p")}}),
       written);
  save(out / "gap.svg", timeseries_svg("gap to wall", t, {{"gap", table.column("gap")}}), written);
  std::vector<Series> moles;
  for (int i = 0; i < ns; ++i) moles.push_back({"moles_" + std::to_string(i), table.column("moles_" + std::to_string(i))});
  save(out / "moles.svg", timeseries_svg("total moles", t, moles), written);
  save(out / "body.svg",
       timeseries_svg("body velocity", t,
                      {{"v_cx", table.column("v_cx")}, {"v_cy", table.column("v_cy")}, {"w", table.column("w")}}),
       written);
  save(out / "picard.svg", timeseries_svg("Picard sweeps", t, {{"picard_iters", table.column("picard_iters")}}), written);
  return written;
}

}  // namespace ekflow
