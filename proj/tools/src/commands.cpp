#include "intsys/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "intsys/dspace.hpp"
#include "intsys/fiber.hpp"
#include "intsys/flow.hpp"

namespace intsys::cli {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kZeroTestCount = 200;
constexpr double kZeroTestTol = 1e-9;
constexpr std::size_t kRankSamples = 10000;
constexpr double kTrajectoryTime = 10.0;
constexpr std::size_t kProbeTrials = 20;
constexpr double kProbeHorizon = 20.0;
constexpr double kClosednessMargin = 1e-6;

std::size_t default_resolution(int dof) {
  switch (dof) {
    case 1: return 200;
    case 2: return 24;
    default: return 8;
  }
}

// Resolved parameters shared by most commands.
struct Params {
  const SystemConfig& cfg;
  const Options& opt;

  std::uint64_t seed() const { return opt.seed.value_or(cfg.defaults.seed.value_or(0)); }
  double atol() const { return opt.atol.value_or(cfg.defaults.atol.value_or(fiber::kDefaultAtol)); }
  std::size_t resolution() const {
    return opt.resolution.value_or(cfg.defaults.resolution.value_or(default_resolution(cfg.dof)));
  }
  CellGrid grid() const { return CellGrid::uniform(cfg.box, resolution()); }
  std::size_t count() const { return opt.count.value_or(kZeroTestCount); }
  double tol() const { return opt.tol.value_or(kZeroTestTol); }
  double rank_tol() const { return opt.rank_tol.value_or(hamsys::kDefaultRankTol); }
  fiber::Connectivity connectivity() const {
    return opt.moore ? fiber::Connectivity::Corner : fiber::Connectivity::Face;
  }
  ImageLattice lattice() const {
    auto spec = opt.lattice ? opt.lattice : cfg.defaults.lattice;
    if (!spec) throw InvalidArgument("--lattice is required (no default in config)");
    auto lat = ImageLattice::parse(*spec);
    if (lat.dim() != static_cast<std::size_t>(cfg.dof)) {
      throw InvalidArgument("--lattice needs " + std::to_string(cfg.dof) + " axes");
    }
    return lat;
  }
  Point seed_point() const {
    if (!opt.seed_point) throw InvalidArgument("--seed-point is required");
    if (opt.seed_point->size() != cfg.system.dimension()) {
      throw InvalidArgument("--seed-point needs " + std::to_string(cfg.system.dimension()) + " coordinates");
    }
    if (!cfg.box.contains(*opt.seed_point)) throw InvalidArgument("--seed-point lies outside the box");
    return *opt.seed_point;
  }
  Point value() const {
    if (opt.value) {
      if (opt.value->size() != static_cast<std::size_t>(cfg.dof)) {
        throw InvalidArgument("--value needs " + std::to_string(cfg.dof) + " components");
      }
      return *opt.value;
    }
    if (opt.seed_point) return cfg.system.values(seed_point());
    throw InvalidArgument("--value or --seed-point is required");
  }
};

Json point_json(std::span<const double> x) { return Json(std::vector<double>(x.begin(), x.end())); }

std::string csv_header(const SystemConfig& cfg) {
  std::string h;
  for (const auto& name : cfg.system.variables().names()) h += (h.empty() ? "" : ",") + name;
  return h;
}

void csv_point(std::ostringstream& os, std::span<const double> x) {
  for (std::size_t k = 0; k < x.size(); ++k) os << (k ? "," : "") << format_number(x[k]);
}

Json zero_verdict_json(const expr::ZeroVerdict& v) {
  Json j;
  j["kind"] = std::string(expr::to_string(v.kind));
  j["evaluated"] = v.evaluated;
  j["domain_errors"] = v.domain_errors;
  if (v.kind == expr::ZeroKind::Nonzero) {
    j["witness"] = point_json(v.witness);
    j["witness_value"] = v.witness_value;
  }
  return j;
}

Json rank_json(const hamsys::RankReport& r, double threshold) {
  Json j;
  j["samples"] = r.samples;
  j["histogram"] = r.histogram;
  j["full_rank_fraction"] = r.full_rank_fraction;
  j["threshold"] = threshold;
  j["pass"] = r.passes(threshold);
  j["skipped"] = r.skipped;
  Json w = Json::array();
  for (const auto& x : r.low_rank_witnesses) w.push_back(point_json(x));
  j["low_rank_witnesses"] = w;
  return j;
}

std::vector<expr::Expr> parse_phi(const std::string& text, const SystemConfig& cfg) {
  std::vector<expr::Expr> out;
  std::size_t start = 0;
  while (true) {
    auto end = text.find(';', start);
    auto part = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    try {
      out.push_back(expr::parse(part, cfg.system.variables()));
    } catch (const expr::ParseError& e) {
      throw InvalidArgument("--phi component " + std::to_string(out.size() + 1) + ": " + e.what());
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  if (out.size() != cfg.system.dimension()) {
    throw InvalidArgument("--phi needs " + std::to_string(cfg.system.dimension()) + " ';'-separated components");
  }
  return out;
}

// ---------------------------------------------------------------------------

RunResult cmd_check(const Params& p, Json& params, Json& warnings) {
  const double threshold = p.opt.threshold.value_or(hamsys::kDefaultFullRankThreshold);
  const std::size_t samples = p.opt.samples.value_or(kRankSamples);
  params["count"] = p.count();
  params["tol"] = p.tol();
  params["samples"] = samples;
  params["rank_tol"] = p.rank_tol();

  auto inv = hamsys::check_involution(p.cfg.system, p.count(), p.tol(), p.seed());
  auto rank = hamsys::rank_scan(p.cfg.system, samples, p.rank_tol(), p.seed());

  RunResult r;
  Json pairs = Json::array();
  for (std::size_t i = 0; i < inv.dof; ++i) {
    for (std::size_t j = i + 1; j < inv.dof; ++j) {
      Json e = zero_verdict_json(inv.at(i, j));
      e["i"] = i + 1;
      e["j"] = j + 1;
      pairs.push_back(e);
    }
  }
  r.report["involution"] = {{"pass", inv.pass}, {"numeric_only", inv.numeric_only}, {"pairs", pairs}};
  r.report["rank"] = rank_json(rank, threshold);
  if (inv.numeric_only) warnings.push_back("involution accepted on numeric evidence only");
  r.exit_code = inv.pass && rank.passes(threshold) ? kExitPass : kExitFail;
  return r;
}

RunResult cmd_rank(const Params& p, Json& params, Json&) {
  const double threshold = p.opt.threshold.value_or(hamsys::kDefaultFullRankThreshold);
  const std::size_t samples = p.opt.samples.value_or(kRankSamples);
  params["samples"] = samples;
  params["rank_tol"] = p.rank_tol();
  RunResult r;
  auto rank = hamsys::rank_scan(p.cfg.system, samples, p.rank_tol(), p.seed());
  r.report["rank"] = rank_json(rank, threshold);
  if (p.opt.seed_point) {
    Point x = p.seed_point();
    r.report["at_point"] = {{"point", point_json(x)},
                            {"rank", hamsys::jacobian_rank(p.cfg.system, x, p.rank_tol())},
                            {"orbit_dimension", flow::orbit_dimension(p.cfg.system, x, p.rank_tol())}};
  }
  r.exit_code = rank.passes(threshold) ? kExitPass : kExitFail;
  return r;
}

RunResult cmd_trajectory(const Params& p, Json& params, Json& warnings) {
  const auto& sys = p.cfg.system;
  const std::size_t field = *p.opt.field;
  if (field < 1 || field > static_cast<std::size_t>(sys.dof())) {
    throw InvalidArgument("--field must be in 1.." + std::to_string(sys.dof()));
  }
  Point x0 = p.seed_point();
  const double t_final = p.opt.t_final.value_or(kTrajectoryTime);
  const double h = p.opt.step.value_or(flow::kDefaultStep);
  params["field"] = field;
  params["t_final"] = t_final;
  params["step"] = h;

  auto traj = flow::integrate_flow(sys, field - 1, x0, t_final, h);
  auto cons = flow::conservation_check(sys, traj, p.count(), p.tol(), p.seed());

  RunResult r;
  Json drift = Json::array();
  for (std::size_t j = 0; j < cons.drift.size(); ++j) {
    drift.push_back({{"integral", j + 1}, {"drift", cons.drift[j]}, {"expected_conserved", bool(cons.expected_conserved[j])}});
  }
  r.report["trajectory"] = {{"termination", std::string(flow::to_string(traj.termination))},
                            {"samples", traj.points.size()},
                            {"step", traj.step},
                            {"endpoint", point_json(traj.back())},
                            {"final_time", traj.direction * traj.elapsed.back()}};
  r.report["conservation"] = drift;
  if (traj.escaped()) warnings.push_back("trajectory left the inflated box and was truncated");
  if (traj.termination == flow::Termination::DomainError) warnings.push_back("trajectory stopped at a domain error");

  std::ostringstream csv;
  csv << "t," << csv_header(p.cfg) << "\n";
  for (std::size_t k = 0; k < traj.points.size(); ++k) {
    csv << format_number(traj.direction * traj.elapsed[k]) << ",";
    csv_point(csv, traj.points[k]);
    csv << "\n";
  }
  r.artifacts.push_back({"trajectory", "csv", csv.str()});
  return r;
}

RunResult cmd_orbit(const Params& p, Json& params, Json& warnings) {
  if (p.opt.field) return cmd_trajectory(p, params, warnings);
  const auto& sys = p.cfg.system;
  Point x0 = p.seed_point();
  const std::size_t budget = p.opt.budget.value_or(flow::ExploreOptions{}.budget);
  const double h = p.opt.step.value_or(flow::kDefaultStep);
  params["budget"] = budget;
  params["step"] = h;
  params["resolution"] = p.resolution();
  params["atol"] = p.atol();

  auto rep = fiber::orbit_vs_fiber_check(sys, x0, budget, p.grid(), p.atol(), h);
  RunResult r;
  Json j;
  j["containment"] = rep.containment;
  if (rep.label) j["label"] = *rep.label;
  j["components"] = rep.components;
  j["cloud_cells"] = rep.cloud_cells;
  j["stray_cells"] = rep.stray_cells;
  j["component_cells"] = rep.component_cells;
  j["hit_cells"] = rep.hit_cells;
  j["coverage"] = rep.coverage;
  j["direct_coverage"] = rep.direct_coverage;
  j["budget_used"] = rep.orbit.budget_used;
  j["closed"] = rep.orbit.closed;
  j["escaped_branches"] = rep.orbit.escaped_branches;
  j["value_drift"] = rep.orbit.value_drift;
  j["orbit_dimension"] = flow::orbit_dimension(sys, x0, p.rank_tol());
  r.report["orbit"] = j;
  if (rep.orbit.escaped_branches > 0) {
    warnings.push_back(std::to_string(rep.orbit.escaped_branches) + " exploration branches escaped the box");
  }
  r.exit_code = rep.containment ? kExitPass : kExitFail;

  std::ostringstream csv;
  csv << csv_header(p.cfg) << "\n";
  for (const auto& x : rep.orbit.cloud) {
    csv_point(csv, x);
    csv << "\n";
  }
  r.artifacts.push_back({"cloud", "csv", csv.str()});
  return r;
}

RunResult cmd_fiber(const Params& p, Json& params, Json& warnings) {
  const auto& sys = p.cfg.system;
  Point c = p.value();
  auto grid = p.grid();
  params["value"] = point_json(c);
  params["resolution"] = p.resolution();
  params["atol"] = p.atol();
  params["connectivity"] = p.opt.moore ? "corner" : "face";

  auto fs = fiber::sample_fiber(sys, c, grid, p.atol());
  auto lab = fiber::connected_components(fs, p.connectivity());
  RunResult r;
  Json comps = Json::array();
  for (std::size_t k = 0; k < lab.count(); ++k) {
    comps.push_back({{"label", k}, {"cells", lab.sizes[k]}, {"representative", point_json(grid.center(lab.representatives[k]))}});
  }
  r.report["fiber"] = {{"marked_cells", fs.marked.size()},
                       {"components", lab.count()},
                       {"domain_errors", fs.domain_errors},
                       {"labels", comps}};
  if (fs.domain_errors) warnings.push_back(std::to_string(fs.domain_errors) + " cells skipped on domain errors");

  std::ostringstream csv;
  csv << csv_header(p.cfg) << ",label\n";
  Point x(grid.dim());
  for (std::size_t k = 0; k < lab.cells.size(); ++k) {
    grid.center(lab.cells[k], x);
    csv_point(csv, x);
    csv << "," << lab.labels[k] << "\n";
  }
  r.artifacts.push_back({"cells", "csv", csv.str()});
  return r;
}

RunResult cmd_scan(const Params& p, Json& params, Json& warnings) {
  auto lattice = p.lattice();
  params["lattice"] = lattice.to_string();
  params["resolution"] = p.resolution();
  params["atol"] = p.atol();
  params["connectivity"] = p.opt.moore ? "corner" : "face";

  fiber::ScanOptions so;
  so.atol = p.atol();
  so.connectivity = p.connectivity();
  auto table = fiber::bifurcation_scan(p.cfg.system, lattice, p.grid(), so);

  RunResult r;
  Json rows = Json::array();
  std::ostringstream csv;
  for (int i = 1; i <= p.cfg.dof; ++i) csv << "c" << i << ",";
  csv << "count,critical\n";
  for (const auto& row : table.rows) {
    rows.push_back({{"value", point_json(row.value)}, {"count", row.count}, {"critical", row.critical}});
    csv_point(csv, row.value);
    csv << "," << row.count << "," << (row.critical ? 1 : 0) << "\n";
    if (row.critical) {
      std::ostringstream w;
      w << "near-critical fibers at value";
      for (double v : row.value) w << " " << format_number(v);
      w << "; component count unreliable";
      warnings.push_back(w.str());
    }
  }
  r.report["scan"] = rows;
  r.artifacts.push_back({"scan", "csv", csv.str()});
  return r;
}

Json orbit_space_json(const dspace::OrbitSpace& os) {
  Json labels = Json::array();
  for (std::size_t k = 0; k < os.labels.size(); ++k) {
    const auto& l = os.labels[k];
    labels.push_back({{"id", k},
                      {"lattice_cell", l.lattice_cell},
                      {"mu", point_json(os.mu(k))},
                      {"component", l.component},
                      {"cells", l.cells},
                      {"representative", point_json(os.grid.center(l.representative))}});
  }
  Json edges = Json::array();
  for (const auto& [a, b] : os.edges) edges.push_back({a, b});
  Json critical = Json::array();
  for (std::size_t k = 0; k < os.critical.size(); ++k) {
    if (os.critical[k]) critical.push_back(point_json(os.lattice.value(k)));
  }
  auto g = dspace::summarize_base_graph(os);
  Json graph = {{"vertices", g.vertices}, {"edges", g.edges},          {"components", g.components},
                {"leaves", g.leaves},     {"branch_vertices", g.branch_vertices},
                {"max_degree", g.max_degree}, {"tree", g.is_tree()},   {"path", g.is_path()},
                {"y_shaped", g.is_y_shaped()}};
  return {{"labels", labels}, {"edges", edges}, {"critical_values", critical}, {"graph", graph},
          {"marked_cells", os.cells.size()}, {"thin_cells", os.thin_cells}, {"domain_errors", os.domain_errors}};
}

void orbit_space_artifacts(const dspace::OrbitSpace& os, int dof, RunResult& r) {
  std::ostringstream labels;
  labels << "label";
  for (int i = 1; i <= dof; ++i) labels << ",mu" << i;
  labels << ",component,cells\n";
  for (std::size_t k = 0; k < os.labels.size(); ++k) {
    labels << k << ",";
    csv_point(labels, os.mu(k));
    labels << "," << os.labels[k].component << "," << os.labels[k].cells << "\n";
  }
  std::ostringstream edges;
  edges << "a,b\n";
  std::ostringstream dot;
  dot << "graph base_space {\n";
  for (std::size_t k = 0; k < os.labels.size(); ++k) {
    dot << "  " << k << " [label=\"";
    auto mu = os.mu(k);
    for (std::size_t i = 0; i < mu.size(); ++i) dot << (i ? "," : "") << format_number(mu[i]);
    dot << "\"];\n";
  }
  for (const auto& [a, b] : os.edges) {
    edges << a << "," << b << "\n";
    dot << "  " << a << " -- " << b << ";\n";
  }
  dot << "}\n";
  r.artifacts.push_back({"labels", "csv", labels.str()});
  r.artifacts.push_back({"edges", "csv", edges.str()});
  r.artifacts.push_back({"base", "dot", dot.str()});
}

void critical_warnings(const dspace::OrbitSpace& os, Json& warnings) {
  if (os.thin_cells > 0) {
    warnings.push_back(std::to_string(os.thin_cells) +
                       " marked cells are wider than their slab; raise --resolution if components fragment");
  }
  for (std::size_t k = 0; k < os.critical.size(); ++k) {
    if (!os.critical[k]) continue;
    std::ostringstream w;
    w << "near-critical cells in lattice cell at";
    for (double v : os.lattice.value(k)) w << " " << format_number(v);
    warnings.push_back(w.str());
  }
}

RunResult cmd_atlas(const Params& p, Json& params, Json& warnings) {
  auto lattice = p.lattice();
  params["lattice"] = lattice.to_string();
  params["resolution"] = p.resolution();
  params["connectivity"] = p.opt.moore ? "corner" : "face";
  auto os = dspace::build_orbit_space(p.cfg.system, lattice, p.grid(), p.connectivity());
  auto fact = dspace::check_factorization(os);

  RunResult r;
  r.report["orbit_space"] = orbit_space_json(os);
  Json f = {{"pass", fact.pass}, {"checked", fact.checked}};
  if (fact.counterexample) f["counterexample"] = *fact.counterexample;
  r.report["factorization"] = f;
  critical_warnings(os, warnings);
  r.exit_code = fact.pass ? kExitPass : kExitFail;
  orbit_space_artifacts(os, p.cfg.dof, r);
  return r;
}

RunResult cmd_mu(const Params& p, Json& params, Json& warnings) {
  auto lattice = p.lattice();
  params["lattice"] = lattice.to_string();
  params["resolution"] = p.resolution();
  params["connectivity"] = p.opt.moore ? "corner" : "face";
  auto os = dspace::build_orbit_space(p.cfg.system, lattice, p.grid(), p.connectivity());
  auto mu = dspace::mu_bijectivity_test(os);

  RunResult r;
  Json wit = Json::array();
  std::ostringstream csv;
  for (int i = 1; i <= p.cfg.dof; ++i) csv << "c" << i << ",";
  csv << "labels\n";
  for (const auto& w : mu.witnesses) {
    wit.push_back({{"value", point_json(w.value)}, {"labels", w.labels}});
    csv_point(csv, w.value);
    csv << "," << w.labels << "\n";
  }
  r.report["mu"] = {{"verdict", mu.bijective ? "bijective-at-resolution" : "disconnected-fibers"},
                    {"labels", os.labels.size()},
                    {"witnesses", wit}};
  critical_warnings(os, warnings);
  r.exit_code = mu.bijective ? kExitPass : kExitFail;
  r.artifacts.push_back({"witnesses", "csv", csv.str()});
  return r;
}

RunResult cmd_equiv(const Params& p, const SystemConfig& other, Json& params, Json& warnings) {
  dspace::EquivalenceOptions eo;
  eo.count = p.count();
  eo.tol = p.tol();
  eo.rank_tol = p.opt.rank_tol.value_or(eo.rank_tol);
  eo.seed = p.seed();
  params["count"] = eo.count;
  params["tol"] = eo.tol;
  params["rank_tol"] = eo.rank_tol;
  params["resolution"] = p.resolution();
  auto v = dspace::systems_equivalent(p.cfg.system, other.system, p.grid(), eo);

  RunResult r;
  Json j;
  j["verdict"] = std::string(dspace::to_string(v.verdict));
  j["qualifier"] = v.qualifier;
  j["numeric_only"] = v.numeric_only;
  j["compared_cells"] = v.compared_cells;
  j["mismatch_cells"] = v.mismatch_cells;
  j["rank_deficient_cells"] = v.rank_deficient_cells;
  if (v.bracket) {
    const auto& b = *v.bracket;
    j["bracket_witness"] = {{"tested", std::string(b.g_against_f ? "g" : "f") + std::to_string(b.tested + 1)},
                            {"against", std::string(b.g_against_f ? "f" : "g") + std::to_string(b.against + 1)},
                            {"point", point_json(b.point)},
                            {"value", b.value}};
  }
  if (v.mismatch_point) j["mismatch_point"] = point_json(*v.mismatch_point);
  r.report["equivalence"] = j;
  if (v.numeric_only) warnings.push_back("cross-commutation accepted on numeric evidence only");
  switch (v.verdict) {
    case dspace::Equivalence::Equivalent: r.exit_code = kExitPass; break;
    case dspace::Equivalence::NotEquivalent: r.exit_code = kExitFail; break;
    case dspace::Equivalence::Inconclusive:
      warnings.push_back("rank-deficient cells dominate the grid");
      r.exit_code = kExitError;
      break;
  }
  return r;
}

RunResult cmd_sympeq(const Params& p, const SystemConfig& target, Json& params, Json& warnings) {
  if (!p.opt.phi) throw InvalidArgument("--phi is required");
  auto phi = parse_phi(*p.opt.phi, p.cfg);
  const std::size_t count = p.opt.samples.value_or(p.count());
  params["phi"] = *p.opt.phi;
  params["samples"] = count;
  params["tol"] = p.tol();
  auto v = dspace::symplectic_equivalence_check(p.cfg.system, target.system, phi, count, p.tol(), p.seed());

  RunResult r;
  Json j = {{"pass", v.pass},
            {"symplectic", v.symplectic},
            {"pullback", v.pullback},
            {"symplectic_defect", v.symplectic_defect},
            {"pullback_defect", v.pullback_defect},
            {"samples", v.samples},
            {"domain_errors", v.domain_errors},
            {"outside_target_box", v.outside_target_box}};
  if (v.witness) j["witness"] = point_json(*v.witness);
  r.report["symplectic"] = j;
  if (v.domain_errors) warnings.push_back(std::to_string(v.domain_errors) + " samples hit domain errors");
  if (v.outside_target_box) warnings.push_back(std::to_string(v.outside_target_box) + " images fell outside the target box");
  r.exit_code = v.pass ? kExitPass : kExitFail;
  return r;
}

RunResult cmd_closedness(const Params& p, Json& params, Json& warnings) {
  const double margin = p.opt.margin.value_or(kClosednessMargin);
  params["margin"] = margin;
  params["resolution"] = p.resolution();
  auto rep = dspace::image_closedness_probe(p.cfg.system, p.grid(), margin);

  RunResult r;
  Json ex = Json::array();
  for (const auto& e : rep.extremes) {
    ex.push_back({{"axis", e.axis + 1},
                  {"side", e.is_max ? "max" : "min"},
                  {"value", e.value},
                  {"limit", e.limit},
                  {"on_box_boundary", e.on_box_boundary},
                  {"kind", std::string(dspace::to_string(e.kind))}});
  }
  r.report["closedness"] = {{"verdict", rep.empty ? "empty-image" : rep.closed_in_box ? "closed-in-box" : "suspect"},
                            {"caveat", std::string(dspace::ClosednessReport::kCaveat)},
                            {"extremes", ex},
                            {"suspects", rep.suspects.size()}};
  warnings.push_back(std::string(dspace::ClosednessReport::kCaveat));
  r.exit_code = rep.closed_in_box ? kExitPass : kExitFail;
  return r;
}

RunResult cmd_probe(const Params& p, Json& params, Json& warnings) {
  const std::size_t trials = p.opt.trials.value_or(kProbeTrials);
  const double horizon = p.opt.horizon.value_or(kProbeHorizon);
  flow::ProbeOptions po;
  po.step = p.opt.step.value_or(po.step);
  po.seed = p.seed();
  params["trials"] = trials;
  params["horizon"] = horizon;
  params["step"] = po.step;
  auto rep = flow::completeness_probe(p.cfg.system, trials, horizon, po);

  auto record = [](const flow::EscapeRecord& e) {
    return Json{{"seed", point_json(e.seed)},
                {"field", e.field + 1},
                {"direction", e.direction},
                {"kind", std::string(flow::to_string(e.kind))},
                {"escape_time", e.escape_time},
                {"final_norm", e.final_norm},
                {"speed_ratio", e.speed_ratio}};
  };
  RunResult r;
  Json wit = Json::array();
  for (const auto& e : rep.witnesses) wit.push_back(record(e));
  Json lin = Json::array();
  for (const auto& e : rep.linear_escapes) lin.push_back(record(e));
  r.report["completeness"] = {
      {"verdict", rep.blow_up_suspected() ? "escape-witnesses" : rep.linear_escapes.empty() ? "no-blow-up-observed" : "linear-escape-complete"},
      {"caveat", std::string(flow::CompletenessReport::kCaveat)},
      {"bounded", rep.bounded},
      {"witnesses", wit},
      {"linear_escapes", lin}};
  warnings.push_back(std::string(flow::CompletenessReport::kCaveat));
  r.exit_code = rep.blow_up_suspected() ? kExitFail : kExitPass;
  return r;
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"check", "rank",   "orbit", "fiber",     "scan",          "atlas",
                                                 "mu",    "equiv", "sympeq", "closedness", "probe-complete"};
  return names;
}

RunResult run_command(std::string_view command, std::span<const SystemConfig> configs, const Options& options) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    throw InvalidArgument("unknown command '" + std::string(command) + "'");
  }
  const bool pair = command == "equiv" || command == "sympeq";
  if (configs.empty() || configs.size() > 2 || (!pair && configs.size() != 1) || (command == "equiv" && configs.size() != 2)) {
    throw InvalidArgument(std::string(command) + (command == "equiv" ? " needs two configs"
                                                  : pair            ? " needs one or two configs"
                                                                    : " needs exactly one config"));
  }

  auto start = std::chrono::steady_clock::now();
  Params p{configs[0], options};
  Json params;
  params["seed"] = p.seed();
  Json warnings = Json::array();

  RunResult r;
  if (command == "check") r = cmd_check(p, params, warnings);
  else if (command == "rank") r = cmd_rank(p, params, warnings);
  else if (command == "orbit") r = cmd_orbit(p, params, warnings);
  else if (command == "fiber") r = cmd_fiber(p, params, warnings);
  else if (command == "scan") r = cmd_scan(p, params, warnings);
  else if (command == "atlas") r = cmd_atlas(p, params, warnings);
  else if (command == "mu") r = cmd_mu(p, params, warnings);
  else if (command == "equiv") r = cmd_equiv(p, configs[1], params, warnings);
  else if (command == "sympeq") r = cmd_sympeq(p, configs.back(), params, warnings);
  else if (command == "closedness") r = cmd_closedness(p, params, warnings);
  else r = cmd_probe(p, params, warnings);

  Json report;
  report["command"] = std::string(command);
  Json cfgs = Json::array();
  for (const auto& c : configs) cfgs.push_back({{"name", c.name}, {"digest", c.digest}});
  report["configs"] = cfgs;
  report["parameters"] = params;
  for (auto& [key, value] : r.report.items()) report[key] = value;
  report["warnings"] = warnings;
  report["exit_code"] = r.exit_code;
  report["timing"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  r.report = std::move(report);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    auto end = text.find(',', start);
    std::string part = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    double v = 0.0;
    const char* first = part.data();
    const char* last = first + part.size();
    while (first < last && *first == ' ') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
      throw InvalidArgument(std::string(flag) + ": cannot parse number '" + part + "'");
    }
    out.push_back(v);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Symbolic-numeric checks for integrable Hamiltonian systems", "intsys"};
  std::string command;
  std::vector<std::string> files;
  std::string value, seed_point, lattice, phi, format = "json", out_path;
  std::size_t resolution = 0, budget = 0, samples = 0, count = 0, field = 0, trials = 0;
  double atol = 0, tol = 0, rank_tol = 0, threshold = 0, t_final = 0, step = 0, horizon = 0, margin = 0;
  std::uint64_t seed = 0;
  bool moore = false;

  std::string command_list;
  for (const auto& c : command_names()) command_list += (command_list.empty() ? "" : ", ") + c;
  app.add_option("command", command, "One of: " + command_list)->required();
  app.add_option("configs", files, "System config JSON file(s)")->required()->expected(1, 2);
  auto* o_value = app.add_option("--value", value, "Image value c1,...,cn");
  auto* o_point = app.add_option("--seed-point", seed_point, "Phase point q1,..,qn,p1,..,pn");
  auto* o_res = app.add_option("--resolution", resolution, "Grid cells per axis")->check(CLI::Range(2, 100000));
  auto* o_atol = app.add_option("--atol", atol, "Absolute fiber band tolerance")->check(CLI::PositiveNumber);
  auto* o_tol = app.add_option("--tol", tol, "Zero-test / defect tolerance")->check(CLI::PositiveNumber);
  auto* o_rtol = app.add_option("--rank-tol", rank_tol, "Relative singular value cutoff")->check(CLI::PositiveNumber);
  auto* o_thr = app.add_option("--threshold", threshold, "Full-rank fraction threshold")->check(CLI::Range(0.0, 1.0));
  auto* o_budget = app.add_option("--budget", budget, "Orbit exploration budget")->check(CLI::PositiveNumber);
  auto* o_lat = app.add_option("--lattice", lattice, "Image lattice lo:hi:count per axis, comma separated");
  auto* o_seed = app.add_option("--seed", seed, "Random seed");
  auto* o_samples = app.add_option("--samples", samples, "Sample count (rank, sympeq)")->check(CLI::PositiveNumber);
  auto* o_count = app.add_option("--count", count, "Zero-test sample count")->check(CLI::PositiveNumber);
  auto* o_phi = app.add_option("--phi", phi, "Map components separated by ';'");
  auto* o_field = app.add_option("--field", field, "Integrate a single flow X_{f_i} (orbit)");
  auto* o_tf = app.add_option("--t-final", t_final, "Flow time for --field");
  auto* o_step = app.add_option("--step", step, "RK4 step")->check(CLI::PositiveNumber);
  auto* o_trials = app.add_option("--trials", trials, "Completeness probe trials")->check(CLI::PositiveNumber);
  auto* o_hor = app.add_option("--horizon", horizon, "Completeness probe horizon")->check(CLI::PositiveNumber);
  auto* o_margin = app.add_option("--margin", margin, "Closedness margin")->check(CLI::PositiveNumber);
  app.add_flag("--moore", moore, "Corner (Moore) adjacency for components");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", out_path, "Report path; artifacts are written next to it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    Options opt;
    if (o_value->count()) opt.value = parse_list(value, "--value");
    if (o_point->count()) opt.seed_point = parse_list(seed_point, "--seed-point");
    if (o_res->count()) opt.resolution = resolution;
    if (o_atol->count()) opt.atol = atol;
    if (o_tol->count()) opt.tol = tol;
    if (o_rtol->count()) opt.rank_tol = rank_tol;
    if (o_thr->count()) opt.threshold = threshold;
    if (o_budget->count()) opt.budget = budget;
    if (o_lat->count()) opt.lattice = lattice;
    if (o_seed->count()) opt.seed = seed;
    if (o_samples->count()) opt.samples = samples;
    if (o_count->count()) opt.count = count;
    if (o_phi->count()) opt.phi = phi;
    if (o_field->count()) opt.field = field;
    if (o_tf->count()) opt.t_final = t_final;
    if (o_step->count()) opt.step = step;
    if (o_trials->count()) opt.trials = trials;
    if (o_hor->count()) opt.horizon = horizon;
    if (o_margin->count()) opt.margin = margin;
    opt.moore = moore;

    std::vector<SystemConfig> configs;
    for (const auto& f : files) configs.push_back(load_config(f));
    RunResult r = run_command(command, configs, opt);

    const std::string report = r.report.dump(2) + "\n";
    if (format == "csv") {
      if (r.artifacts.empty()) throw InvalidArgument(command + " produces no table; use --format json");
      const std::string& table = r.artifacts.front().content;
      if (out_path.empty()) out << table;
      else write_file(out_path, table);
    } else if (out_path.empty()) {
      out << report;
    } else {
      std::filesystem::path p(out_path);
      write_file(p, report);
      for (const auto& a : r.artifacts) {
        auto ap = p.parent_path() / (p.stem().string() + "." + a.name + "." + a.extension);
        write_file(ap, a.content);
      }
    }
    return r.exit_code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace intsys::cli
