#include "convfold/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "convfold/appendix3d.hpp"
#include "convfold/concavity.hpp"
#include "convfold/corpus.hpp"
#include "convfold/folding.hpp"
#include "convfold/parallel.hpp"
#include "convfold/plap_solver.hpp"

namespace convfold::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kOutputKeys{"out", "csv", "grid", "svg", "obj"};

[[noreturn]] void bad_value(const std::string& key, const std::string& v, const char* what) {
  throw Error(ErrorKind::InvalidConfig, "'" + key + "' expects " + what + ", got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) bad_value(key, v, "a number");
  return x;
}

long parse_long(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) bad_value(key, v, "an integer");
  return x;
}

}  // namespace

std::string ExperimentConfig::str(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.empty()) return fallback;
  if (it->second.size() != 1) throw Error(ErrorKind::InvalidConfig, "'" + key + "' expects a single value");
  return it->second.front();
}

double ExperimentConfig::num(const std::string& key, double fallback) const {
  return has(key) ? parse_double(key, str(key, "")) : fallback;
}

long ExperimentConfig::integer(const std::string& key, long fallback) const {
  return has(key) ? parse_long(key, str(key, "")) : fallback;
}

bool ExperimentConfig::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto v = str(key, "");
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> ExperimentConfig::strs(const std::string& key,
                                                const std::vector<std::string>& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::vector<double> ExperimentConfig::nums(const std::string& key, const std::vector<double>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  for (const auto& v : it->second) out.push_back(parse_double(key, v));
  return out;
}

json ExperimentConfig::to_json() const {
  json j = json::object();
  for (const auto& [k, v] : entries_) {
    if (kOutputKeys.count(k) || k == "config") continue;
    j[k] = v.size() == 1 ? json(v.front()) : json(v);
  }
  return j;
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

namespace {

// ---------------------------------------------------------------- report helpers

json vec(const Vec2& x) { return json::array({x.x(), x.y()}); }
json vec(const Vec3& x) { return json::array({x.x(), x.y(), x.z()}); }

json poly(const ConvexPolygon& k) {
  json a = json::array();
  for (const auto& v : k.vertices()) a.push_back(vec(v));
  return a;
}

json base_report(const ExperimentConfig& c) {
  json r;
  r["command"] = c.command();
  r["seed"] = c.integer("seed", 7);
  r["config"] = c.to_json();
  return r;
}

Outcome finish(json report, bool passed) {
  report["passed"] = passed;
  return {passed ? kPass : kFail, std::move(report), {}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw Error(ErrorKind::InvalidConfig, "cannot write '" + path + "'");
}

std::vector<std::pair<double, double>> read_table(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::InvalidConfig, "cannot read reaction table '" + path + "'");
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream in(line);
    double t, v;
    if (in >> t >> v) rows.emplace_back(t, v);
  }
  return rows;
}

Reaction make_reaction(const ExperimentConfig& c, const std::string& kind, double p) {
  if (kind == "torsion") return Reaction::torsion(p);
  if (kind == "power") {
    const auto q = c.str("q", "auto");
    return Reaction::power(p, c.num("c", 1.0), q == "auto" ? (1 + p) / 2 : parse_double("q", q));
  }
  if (kind == "tabulated") {
    const auto path = c.str("table", "");
    if (path.empty()) throw Error(ErrorKind::InvalidConfig, "tabulated reaction needs --table");
    std::vector<double> t, f;
    for (const auto& [a, b] : read_table(path)) {
      t.push_back(a);
      f.push_back(b);
    }
    return Reaction::tabulated(p, t, f);
  }
  throw Error(ErrorKind::InvalidReaction, "unknown reaction '" + kind + "'");
}

json reaction_json(const Reaction& r) {
  json j{{"name", r.name()}, {"p", r.p}};
  if (r.kind == Reaction::Kind::Power) {
    j["c"] = r.c;
    j["q"] = r.q;
  }
  if (r.kind == Reaction::Kind::Tabulated) j["table_points"] = r.table_t.size();
  return j;
}

json mesh_json(const Mesh& m) {
  return {{"nodes", m.n_points()}, {"triangles", m.n_triangles()}, {"h", m.h()},
          {"min_angle_deg", m.min_angle_degrees()}, {"area", m.total_area()}};
}

json diagnostics_json(const SolveDiagnostics& d) {
  json stages = json::array();
  for (const auto& s : d.stages) {
    stages.push_back({{"p", s.p}, {"eps", s.eps}, {"iterations", s.iterations}, {"energy", s.energy},
                      {"max_u", s.max_u}, {"residual", s.residual}, {"converged", s.converged},
                      {"accepted_iterates", s.energy_history.size()}});
  }
  return {{"gradient_scale", d.gradient_scale}, {"iterations", d.iterations}, {"energy", d.energy},
          {"rel_decrease", d.rel_decrease}, {"residual", d.residual}, {"converged", d.converged},
          {"eps_limit_change", d.eps_limit_change}, {"stages", stages}};
}

json argmax_json(const ArgmaxSet& a) {
  return {{"epsilon", a.epsilon}, {"whole_domain", a.whole_domain}, {"diameter", a.diameter},
          {"width", a.width}, {"width_direction", vec(a.width_direction)}, {"breadth_perp", a.breadth_perp},
          {"alpha_ratio", a.alpha_ratio}, {"beta_ratio", a.beta_ratio},
          {"alpha_beta_condition", a.alpha_beta_condition}};
}

json check_json(const HypothesisCheck& h) {
  return {{"holds", h.holds}, {"worst_violation", h.worst_violation}, {"worst_at", h.worst_at}};
}

json hypotheses_json(const HypothesisReport& h) {
  return {{"n_points", h.n_points},
          {"t_min", h.t_min},
          {"t_max", h.t_max},
          {"ratio_nonincreasing", check_json(h.ratio_nonincreasing)},
          {"exp_ratio_convex", check_json(h.exp_ratio_convex)},
          {"root_concave", check_json(h.root_concave)},
          {"quotient_convex", check_json(h.quotient_convex)}};
}

json concavity_json(const ConcavityReport& r) {
  return {{"n_segments", r.n_segments}, {"seed", r.seed},       {"rejected", r.rejected},
          {"min_gap", r.min_gap},       {"min_normalized_gap", r.min_normalized_gap},
          {"worst_x", vec(r.worst_x)},  {"worst_y", vec(r.worst_y)}, {"scale", r.scale},
          {"strict", r.strict},         {"concave", r.concave}};
}

json quasi_json(const QuasiConcavityReport& q) {
  return {{"n_levels", q.n_levels}, {"tolerance", q.tolerance}, {"worst_defect", q.worst_defect},
          {"worst_level", q.worst_level}, {"max_components", q.max_components}, {"passed", q.passed}};
}

json critical_json(const CriticalReport& c) {
  json centers = json::array();
  for (const auto& x : c.centers) centers.push_back(vec(x));
  return {{"count", c.count}, {"centers", centers}, {"radii", c.radii},
          {"cluster_distance", c.cluster_distance}, {"low_gradient_clusters", c.low_gradient_clusters},
          {"argmax_epsilon", c.argmax_epsilon}, {"argmax_diameter", c.argmax_diameter}};
}

json error_json(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return {{"kind", std::string(to_string(err->kind()))}, {"message", err->what()}};
  }
  return {{"kind", "Exception"}, {"message", e.what()}};
}

json picone_json(const PiconeReport& r) {
  return {{"p", r.p}, {"triangles", r.triangles}, {"min_slack", r.min_slack},
          {"min_relative_slack", r.min_relative_slack}, {"max_relative_slack", r.max_relative_slack},
          {"integral_slack", r.integral_slack}, {"nonnegative", r.nonnegative}, {"equality", r.equality}};
}

// Solve that keeps the last iterate when the continuation does not converge.
Solution solve_recorded(const ConvexPolygon& k, const Reaction& r, double h, json& report) {
  try {
    return solve(k, r, h);
  } catch (const NonConvergence& e) {
    report["error"] = error_json(e);
    return e.last_iterate();
  }
}

void draw_levels(Svg& svg, const ScalarField& u, int n, const std::string& stroke) {
  const double m = u.max();
  for (int i = 1; i < n; ++i) {
    try {
      const auto ls = level_set(u, m * i / n);
      for (std::size_t c = 0; c < ls.contours.size(); ++c) svg.polyline(ls.contours[c], stroke, ls.closed[c]);
    } catch (const Error&) {
    }
  }
}

Svg canvas(const ConvexPolygon& k) {
  const auto [lo, hi] = padded_box(k);
  return Svg(lo, hi);
}

ConvexPolygon reflected(const ConvexPolygon& k, const Cut2& cut) {
  std::vector<Vec2> pts;
  for (const auto& v : k.vertices()) pts.push_back(reflect(v, cut));
  return ConvexPolygon::hull(pts);
}

// ---------------------------------------------------------------- solve

Outcome cmd_solve(const ExperimentConfig& c) {
  json rep = base_report(c);
  const auto k = resolve_domain(c.str("domain", "square"));
  const double p = c.num("p", 2.0);
  const auto reaction = make_reaction(c, c.str("reaction", "torsion"), p);
  reaction.validate();
  const double h = c.num("h", 0.02);
  const auto sol = solve_recorded(k, reaction, h, rep);
  const auto& u = sol.u;
  rep["domain"] = poly(k);
  rep["reaction"] = reaction_json(reaction);
  rep["mesh"] = mesh_json(u.mesh());
  rep["max_u"] = u.max();
  rep["argmax"] = vec(u.mesh().points()[u.argmax_node()]);
  rep["diagnostics"] = diagnostics_json(sol.diagnostics);

  if (c.has("csv")) write_field_csv(u, c.str("csv", ""));
  if (c.has("grid")) {
    const auto n = static_cast<std::uint32_t>(c.integer("grid_n", 200));
    write_grid_binary(resample(u, n, n), c.str("grid", ""));
  }
  if (c.has("svg")) {
    auto svg = canvas(k);
    svg.polygon(k, "black");
    draw_levels(svg, u, static_cast<int>(c.integer("n_levels", 10)), "steelblue");
    svg.point(u.mesh().points()[u.argmax_node()], "crimson");
    svg.save(c.str("svg", ""));
  }
  return finish(rep, sol.diagnostics.converged);
}

// ---------------------------------------------------------------- planar folding

json lemma_json(const LemmaFoldReport& r) {
  return {{"lambda", r.lambda}, {"h_plus", r.h_plus}, {"h_minus", r.h_minus}, {"breadth", r.breadth},
          {"f_plus", r.f_plus}, {"f_minus", r.f_minus}, {"quarter_breadth", r.quarter_breadth},
          {"bound_holds", r.bound_holds}, {"claim_caps_foldable", r.claim_caps_foldable},
          {"media_holds", r.media_holds}, {"mu", r.mu}, {"mu_foldable", r.mu_foldable},
          {"mu_margin_holds", r.mu_margin_holds}, {"passed", r.passed}};
}

Outcome cmd_fold(const ExperimentConfig& c) {
  json rep = base_report(c);
  const auto k = resolve_domain(c.str("domain", "pentagon"));
  const int n = static_cast<int>(c.integer("n_directions", 720));
  if (n < 1) throw Error(ErrorKind::InvalidConfig, "n_directions must be positive");
  const auto s = shadow_section_for_min_breadth(k);
  const auto lemma = lemma_fold_check(k, s.cut);

  double f_min = std::numeric_limits<double>::infinity(), f_max = -f_min;
  Vec2 at_min = Vec2::UnitX(), at_max = Vec2::UnitX();
  for (const auto& w : uniform_directions(n)) {
    const double f = folding_profile(k, w).height;
    if (f < f_min) f_min = f, at_min = w.vector();
    if (f > f_max) f_max = f, at_max = w.vector();
  }

  rep["domain"] = poly(k);
  rep["width"] = {{"value", s.width}, {"direction", vec(s.width_direction.vector())}};
  rep["shadow_section"] = {{"lambda", s.cut.lambda}, {"omega", vec(s.cut.omega.vector())},
                           {"chord", json::array({vec(s.chord.a), vec(s.chord.b)})},
                           {"projection_equals_section", s.projection_equals_section},
                           {"mismatch", s.mismatch}};
  rep["lemma"] = lemma_json(lemma);
  rep["folding_height"] = {{"n_directions", n}, {"min", f_min}, {"min_direction", vec(at_min)},
                           {"max", f_max}, {"max_direction", vec(at_max)}};

  if (c.has("svg")) {
    auto svg = canvas(k);
    svg.polygon(k, "black", "lightgray");
    svg.line(s.cut.omega.vector(), s.cut.lambda, "gray");
    const Cut2 mu_cut(lemma.mu, s.cut.omega);
    svg.line(mu_cut.omega.vector(), mu_cut.lambda, "crimson");
    const auto piece = cap(k, mu_cut);
    if (!piece.empty()) {
      svg.polygon(piece, "crimson", "crimson");
      svg.polygon(reflected(piece, mu_cut), "steelblue", "steelblue");
    }
    svg.save(c.str("svg", ""));
  }
  return finish(rep, lemma.passed && s.projection_equals_section);
}

Outcome cmd_heart(const ExperimentConfig& c) {
  json rep = base_report(c);
  const auto k = resolve_domain(c.str("domain", "pentagon"));
  const int n = static_cast<int>(c.integer("n_directions", 720));
  if (n < 1) throw Error(ErrorKind::InvalidConfig, "n_directions must be positive");
  const auto hrt = heart(k, n);
  rep["domain"] = poly(k);
  rep["heart"] = {{"directions_used", hrt.directions_used}, {"vertices", poly(hrt.body)},
                  {"area", hrt.body.area()}, {"diameter", hrt.body.empty() ? 0.0 : hrt.body.diameter()},
                  {"contains_centroid", hrt.contains(k.centroid(), k.tolerance())}};
  if (c.has("svg")) {
    auto svg = canvas(k);
    svg.polygon(k, "black", "lightgray");
    if (!hrt.body.empty()) svg.polygon(hrt.body, "crimson", "crimson", 0.5);
    svg.save(c.str("svg", ""));
  }
  return finish(rep, !hrt.body.empty());
}

std::vector<ConvexPolygon> lemma_corpus(const ExperimentConfig& c) {
  const auto kind = c.str("corpus", "random");
  if (kind == "builtin") {
    std::vector<ConvexPolygon> out;
    for (const auto& name : builtin_domain_names()) out.push_back(builtin_domain(name));
    return out;
  }
  if (kind != "random") throw Error(ErrorKind::InvalidConfig, "corpus must be random or builtin");
  const long count = c.integer("count", 1000);
  const long vmin = c.integer("min_vertices", 5), vmax = c.integer("max_vertices", 30);
  if (count < 1 || vmin < 3 || vmax < vmin) throw Error(ErrorKind::InvalidConfig, "bad corpus size");
  std::mt19937_64 rng(static_cast<std::uint64_t>(c.integer("seed", 7)));
  std::vector<ConvexPolygon> out;
  for (long i = 0; i < count; ++i) {
    const int n = static_cast<int>(vmin + std::floor(uniform01(rng) * static_cast<double>(vmax - vmin + 1)));
    out.push_back(random_convex_polygon(rng, n));
  }
  return out;
}

Outcome cmd_verify_lemma(const ExperimentConfig& c) {
  json rep = base_report(c);
  const auto which = c.str("which", "");
  const auto corpus = lemma_corpus(c);
  const auto jobs = static_cast<unsigned>(c.integer("jobs", 0));
  const double delta = c.num("delta", 0.01);
  const int n_samples = static_cast<int>(c.integer("n_samples", 64));

  struct Case {
    bool ok = false;
    double slack = 0;
    std::string note;
  };
  auto eval = [&](std::size_t i) -> Case {
    const auto& k = corpus[i];
    Case r;
    try {
      const auto s = shadow_section_for_min_breadth(k);
      if (which == "fold") {
        const auto l = lemma_fold_check(k, s.cut);
        r.slack = std::max(l.f_plus, l.f_minus) - l.quarter_breadth;
        r.ok = r.slack >= -1e-9 && l.mu_foldable && l.mu_margin_holds;
        if (!r.ok) r.note = l.mu_foldable ? "bound" : "mu-fold";
      } else if (which == "section") {
        double mismatch = 0;
        const bool shadow = section_is_shadow(k, s.cut, &mismatch);
        const double media = (support(k, s.cut.omega) - support(k, -s.cut.omega)) / 2;
        r.slack = media - s.cut.lambda;
        r.ok = shadow && r.slack >= -k.tolerance();
        if (!r.ok) r.note = shadow ? "media" : "shadow";
      } else {
        const auto rr = rectangle_rigidity_check(k, s.cut, delta, n_samples);
        r.slack = rr.worst_slack;
        r.ok = rr.passed;
        if (!r.ok) r.note = rr.note;
      }
    } catch (const Error& e) {
      r.note = e.what();
    }
    return r;
  };
  const auto results = parallel_map(corpus.size(), eval, jobs);

  int failures = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  json failed = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    min_slack = std::min(min_slack, results[i].slack);
    if (!results[i].ok) {
      ++failures;
      if (failed.size() < 20) {
        failed.push_back({{"index", i}, {"vertices", corpus[i].size()}, {"note", results[i].note}});
      }
    }
  }
  rep["lemma"] = which;
  rep["polygons"] = corpus.size();
  rep["failures"] = failures;
  rep["min_slack"] = min_slack;
  rep["failed_cases"] = failed;
  return finish(rep, failures == 0);
}

// ---------------------------------------------------------------- appendix

Outcome cmd_appendix(const ExperimentConfig& c) {
  json rep = base_report(c);
  KAlphaSpec spec;
  spec.alpha = c.num("alpha", 0.05);
  const int nd = static_cast<int>(c.integer("n_directions", 5000));
  const int np = static_cast<int>(c.integer("n_points", 101));
  if (nd < 1 || np < 2) throw Error(ErrorKind::InvalidConfig, "n_directions and n_points must be positive");
  const auto body = build_kalpha(spec);

  const auto fb = verify_folding_bound(spec, nd);
  rep["folding_bound"] = {{"alpha", fb.alpha}, {"n_directions", fb.n_directions}, {"bound", fb.bound},
                          {"max_height", fb.max_height}, {"worst_direction", vec(fb.worst_direction)},
                          {"floor_height", fb.floor_height}, {"floor_holds", fb.floor_holds},
                          {"passed", fb.passed}};
  const auto tb = verify_tbar_bound(spec, nd);
  rep["tbar"] = {{"bound", tb.bound}, {"caps_checked", tb.caps_checked},
                 {"caps_meeting_axis", tb.caps_meeting_axis}, {"max_sup", tb.max_sup},
                 {"worst_direction", vec(tb.worst_direction)}, {"untested_alpha", tb.untested_alpha},
                 {"passed", tb.passed}};
  const auto hs = verify_heart_segment(spec, nd, np);
  rep["heart_segment"] = {{"n_points", hs.n_points}, {"points_removed", hs.points_removed},
                          {"min_margin", hs.min_margin}, {"apex_removed", hs.apex_removed},
                          {"heart_body_contains_segment", hs.heart_body_contains_segment},
                          {"passed", hs.passed}};

  std::vector<long> ns;
  for (double v : c.nums("sequence_n", {2, 4, 10})) ns.push_back(static_cast<long>(v));
  std::sort(ns.begin(), ns.end());
  json seq = json::array();
  bool seq_ok = true;
  double prev = std::numeric_limits<double>::infinity();
  for (long n : ns) {
    if (n < 1) throw Error(ErrorKind::InvalidConfig, "sequence_n entries must be positive");
    const auto s = build_sequence_example(static_cast<int>(n), nd);
    const bool decreasing = s.hausdorff < prev;
    prev = s.hausdorff;
    seq_ok = seq_ok && s.passed && decreasing;
    seq.push_back({{"n", s.n}, {"l", s.l}, {"alpha", s.alpha}, {"constraint", s.constraint},
                   {"hausdorff", s.hausdorff}, {"hausdorff_bound", s.hausdorff_bound},
                   {"foldable_caps_meeting_segment", s.foldable_caps_meeting_segment},
                   {"min_margin", s.min_margin}, {"heart_contains_segment", s.heart_contains_segment},
                   {"hausdorff_decreasing", decreasing}, {"passed", s.passed}});
  }
  rep["sequence"] = seq;
  rep["body"] = {{"volume", body.volume()}, {"diameter", body.diameter()}, {"vertices", body.vertices().size()}};
  if (c.has("obj")) write_text(c.str("obj", ""), polytope_to_obj(body));
  return finish(rep, fb.passed && tb.passed && hs.passed && seq_ok);
}

// ---------------------------------------------------------------- concavity analyses

struct Analysis {
  json report;
  bool passed = false;
};

// Solve, then quasi-concavity, critical points and the concavity transforms on one cell.
Analysis analyze(const ExperimentConfig& c, const std::string& domain, const std::string& reaction_name, double p,
                 Svg* svg) {
  Analysis a;
  json& r = a.report;
  r["domain"] = domain;
  r["reaction"] = reaction_name;
  r["p"] = p;
  try {
    const auto k = resolve_domain(domain);
    const auto reaction = make_reaction(c, reaction_name, p);
    reaction.validate();
    const double h = c.num("h", 0.02);
    ConcavityOptions opt;
    opt.n_segments = static_cast<int>(c.integer("n_segments", 10000));
    opt.seed = static_cast<std::uint64_t>(c.integer("seed", 7));
    const int n_levels = static_cast<int>(c.integer("n_levels", 20));

    const auto sol = solve_recorded(k, reaction, h, r);
    const auto& u = sol.u;
    const double diam = k.diameter();
    r["max_u"] = u.max();
    r["converged"] = sol.diagnostics.converged;
    r["residual"] = sol.diagnostics.residual;
    r["nodes"] = u.mesh().n_points();

    const auto quasi = check_quasiconcave(u, n_levels);
    r["quasi_concavity"] = quasi_json(quasi);
    const auto crit = count_critical_points(u);
    r["critical_points"] = critical_json(crit);
    const auto arg = argmax_set(u, u.max() * h / diam);
    r["argmax"] = argmax_json(arg);

    const auto hyp = check_hypotheses(reaction);
    const bool phi_required = hyp.ratio_nonincreasing.holds && hyp.root_concave.holds && hyp.quotient_convex.holds;
    const bool log_required = hyp.ratio_nonincreasing.holds && hyp.exp_ratio_convex.holds;
    bool phi_ok = true, log_ok = true;
    try {
      const auto phi = phi_transform(reaction);
      const auto rep_phi = check_strict_concavity(apply_transform(u, phi), opt);
      r["phi"] = concavity_json(rep_phi);
      r["phi"]["formula"] = phi.formula();
      phi_ok = rep_phi.strict;
    } catch (const Error& e) {
      r["phi"] = {{"error", error_json(e)}};
      phi_ok = false;
    }
    r["phi"]["required"] = phi_required;
    const auto rep_log = check_strict_concavity(apply_transform(u, log_transform()), opt);
    r["log"] = concavity_json(rep_log);
    r["log"]["required"] = log_required;
    log_ok = rep_log.strict;

    bool refine_ok = true;
    if (c.flag("refine", false)) {
      const auto fine = solve_recorded(k, reaction, h / 2, r);
      const auto crit2 = count_critical_points(fine.u);
      const auto arg2 = argmax_set(fine.u, fine.u.max() * (h / 2) / diam);
      const bool shrinks = arg2.diameter < arg.diameter;
      refine_ok = fine.diagnostics.converged && crit2.count == 1 && shrinks;
      r["refined"] = {{"h", h / 2}, {"max_u", fine.u.max()}, {"converged", fine.diagnostics.converged},
                      {"critical_count", crit2.count}, {"argmax", argmax_json(arg2)},
                      {"argmax_shrinks", shrinks}};
    }

    if (svg) {
      svg->polygon(k, "black");
      draw_levels(*svg, u, 10, "steelblue");
      for (const auto& x : crit.centers) svg->point(x, "crimson");
      for (std::size_t i = 0; i < arg.level.contours.size(); ++i) {
        svg->polyline(arg.level.contours[i], "crimson", arg.level.closed[i]);
      }
    }

    a.passed = sol.diagnostics.converged && quasi.passed && crit.count == 1 && (!phi_required || phi_ok) &&
               (!log_required || log_ok) && refine_ok;
  } catch (const Error& e) {
    r["error"] = error_json(e);
    a.passed = false;
  }
  r["passed"] = a.passed;
  return a;
}

Outcome cmd_check_concavity(const ExperimentConfig& c) {
  json rep = base_report(c);
  const auto domain = c.str("domain", "square");
  const auto reaction = make_reaction(c, c.str("reaction", "torsion"), c.num("p", 2.0));
  reaction.validate();
  std::optional<Svg> svg;
  if (c.has("svg")) svg = canvas(resolve_domain(domain));
  auto a = analyze(c, domain, c.str("reaction", "torsion"), c.num("p", 2.0), svg ? &*svg : nullptr);
  rep["analysis"] = a.report;
  if (svg) svg->save(c.str("svg", ""));
  return finish(rep, a.passed);
}

Outcome cmd_check_hypotheses(const ExperimentConfig& c) {
  json rep = base_report(c);
  const auto reaction = make_reaction(c, c.str("reaction", "torsion"), c.num("p", 2.0));
  const auto h = check_hypotheses(reaction, static_cast<int>(c.integer("n_points", 10000)), c.num("scale", 1.0));
  rep["reaction"] = reaction_json(reaction);
  rep["hypotheses"] = hypotheses_json(h);
  bool all = true;
  for (const auto* chk : h.all()) all = all && chk->holds;
  return finish(rep, all);
}

Outcome cmd_picone(const ExperimentConfig& c) {
  json rep = base_report(c);
  const auto k = resolve_domain(c.str("domain", "square"));
  const double p = c.num("p", 2.0);
  const double h = c.num("h", 0.02);
  const auto v = solve_recorded(k, make_reaction(c, c.str("reaction", "torsion"), 2.0), h, rep).u;
  const auto w = solve_on_mesh(v.mesh_ptr(), Reaction::power(2.0, 1.0, 1.5)).u;
  std::mt19937_64 rng(static_cast<std::uint64_t>(c.integer("seed", 7)));
  Eigen::VectorXd noisy = v.values();
  const double noise = c.num("noise", 0.1);
  for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy[i] *= 1 + noise * (uniform01(rng) - 0.5);
  const ScalarField z(v.mesh_ptr(), noisy);
  const ScalarField v2(v.mesh_ptr(), 2 * v.values());

  struct Pair {
    const char* name;
    const ScalarField* a;
    const ScalarField* b;
    bool proportional;
  };
  const Pair pairs[] = {{"v,w", &v, &w, false}, {"w,v", &w, &v, false}, {"v,v", &v, &v, true},
                        {"v,2v", &v, &v2, true}, {"v,noisy", &v, &z, false}, {"noisy,v", &z, &v, false}};
  json out = json::array();
  bool ok = true;
  for (const auto& pr : pairs) {
    const auto r = picone_check(*pr.a, *pr.b, p);
    const bool pass = r.min_relative_slack >= -1e-9 && (!pr.proportional || r.equality);
    ok = ok && pass;
    json j = picone_json(r);
    j["pair"] = pr.name;
    j["proportional"] = pr.proportional;
    j["passed"] = pass;
    out.push_back(j);
  }
  rep["pairs"] = out;
  return finish(rep, ok);
}

Outcome cmd_reflect(const ExperimentConfig& c) {
  json rep = base_report(c);
  const auto k = resolve_domain(c.str("domain", "square"));
  const double p = c.num("p", 2.0);
  const auto reaction = make_reaction(c, c.str("reaction", "torsion"), p);
  reaction.validate();
  const auto sol = solve_recorded(k, reaction, c.num("h", 0.02), rep);
  const auto& u = sol.u;
  const auto r = reflection_comparison_experiment(u, c.num("t", 0.5) * u.max(), c.num("tol", 1e-3));
  rep["max_u"] = u.max();
  rep["reflection"] = {{"level", r.level}, {"defect", r.defect}, {"width_direction", vec(r.width_direction)},
                       {"cut_normal", vec(r.cut_normal)}, {"lambda", r.lambda}, {"mu", r.mu},
                       {"breadth_perp", r.breadth_perp}, {"fold_verified", r.fold_verified},
                       {"points_checked", r.points_checked}, {"min_difference", r.min_difference},
                       {"worst_point", vec(r.worst_point)}, {"tolerance", r.tolerance},
                       {"comparison_holds", r.comparison_holds}, {"level_body", poly(r.level_body)},
                       {"cap_body", poly(r.cap_body)}};
  if (c.has("svg")) {
    auto svg = canvas(k);
    svg.polygon(k, "black");
    svg.polygon(r.level_body, "steelblue", "steelblue", 0.15);
    const Cut2 cut(r.mu, Direction2(r.cut_normal));
    svg.line(r.cut_normal, r.mu, "crimson");
    if (!r.cap_body.empty()) {
      svg.polygon(r.cap_body, "crimson", "crimson");
      svg.polygon(reflected(r.cap_body, cut), "darkorange", "darkorange");
    }
    svg.point(r.worst_point, "black");
    svg.save(c.str("svg", ""));
  }
  return finish(rep, sol.diagnostics.converged && r.fold_verified && r.comparison_holds);
}

Outcome cmd_sweep(const ExperimentConfig& c) {
  json rep = base_report(c);
  const auto domains = c.strs("domains", {"disk", "square", "rectangle3", "random:5:7"});
  const auto ps = c.nums("p", {1.5, 2.0, 3.0});
  const auto reactions = c.strs("reactions", {"torsion"});
  if (domains.empty() || ps.empty() || reactions.empty()) {
    throw Error(ErrorKind::InvalidConfig, "sweep needs at least one domain, p and reaction");
  }
  for (const auto& r : reactions) {
    if (r != "torsion" && r != "power" && r != "tabulated") {
      throw Error(ErrorKind::InvalidReaction, "unknown reaction '" + r + "'");
    }
  }
  struct Cell {
    std::string domain, reaction;
    double p;
  };
  std::vector<Cell> cells;
  for (const auto& d : domains) {
    for (const auto& r : reactions) {
      for (double p : ps) cells.push_back({d, r, p});
    }
  }
  const auto results = parallel_map(
      cells.size(), [&](std::size_t i) { return analyze(c, cells[i].domain, cells[i].reaction, cells[i].p, nullptr); },
      static_cast<unsigned>(c.integer("jobs", 0)));
  json out = json::array();
  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    json j = results[i].report;
    j["cell"] = i;
    out.push_back(j);
    if (!results[i].passed) ++failed;
  }
  rep["cells"] = out;
  rep["n_cells"] = cells.size();
  rep["failed_cells"] = failed;
  return finish(rep, failed == 0);
}

// ---------------------------------------------------------------- dispatch

struct OptionSpec {
  std::string key;
  std::string help;
  bool list = false;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
  std::function<Outcome(const ExperimentConfig&)> handler;
};

const std::vector<OptionSpec> kSolveOpts{
    {"domain", "builtin name, random:<n>:<seed> or geometry file"},
    {"p", "exponent p > 1"},
    {"reaction", "torsion, power or tabulated"},
    {"c", "power reaction coefficient"},
    {"q", "power reaction exponent, or auto for (1+p)/2"},
    {"table", "CSV file of t,f rows for a tabulated reaction"},
    {"h", "mesh size"}};

std::vector<OptionSpec> with(std::vector<OptionSpec> a, const std::vector<OptionSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::vector<Command>& commands() {
  static const std::vector<Command> cmds{
      {"solve", "solve -Delta_p u = f(u) on a convex polygon",
       with(kSolveOpts, {{"csv", "nodal field as x,y,u"},
                         {"grid", "binary grid dump"},
                         {"grid_n", "grid resolution"},
                         {"svg", "contour plot"},
                         {"n_levels", "contours in the plot"}}),
       cmd_solve},
      {"fold", "width, shadow section and the folding lemma on one polygon",
       {{"domain", "polygon"}, {"n_directions", "direction samples"}, {"svg", "figure of K, cut and caps"}},
       cmd_fold},
      {"heart", "outer approximation of the heart",
       {{"domain", "polygon"}, {"n_directions", "direction samples"}, {"svg", "figure of K and its heart"}},
       cmd_heart},
      {"verify-lemma", "folding lemma checks over a polygon corpus",
       {{"corpus", "random or builtin"},
        {"count", "random polygons"},
        {"min_vertices", "fewest vertices"},
        {"max_vertices", "most vertices"},
        {"delta", "angle window for the rectangle check"},
        {"n_samples", "angles for the rectangle check"},
        {"jobs", "worker threads, 0 for all cores"}},
       cmd_verify_lemma},
      {"appendix", "folding bounds, heart and sequence checks for K^alpha",
       {{"alpha", "shape parameter"},
        {"n_directions", "sphere samples"},
        {"n_points", "segment samples"},
        {"sequence_n", "indices of the sequence bodies", true},
        {"obj", "OBJ dump of K^alpha"}},
       cmd_appendix},
      {"check-concavity", "quasi-concavity, critical points and concavity transforms of a solution",
       with(kSolveOpts, {{"n_segments", "random segments"},
                         {"n_levels", "level sets"},
                         {"refine", "also solve at h/2"},
                         {"svg", "level sets and critical points"}}),
       cmd_check_concavity},
      {"check-hypotheses", "conditions on the reaction f",
       {{"p", "exponent"},
        {"reaction", "torsion, power or tabulated"},
        {"c", "power coefficient"},
        {"q", "power exponent"},
        {"table", "tabulated reaction CSV"},
        {"n_points", "sample points"},
        {"scale", "sampling range scale"}},
       cmd_check_hypotheses},
      {"picone", "discrete Picone inequality on solution pairs",
       with(kSolveOpts, {{"noise", "relative amplitude of the perturbed pair"}}), cmd_picone},
      {"reflect-experiment", "folds a level set and compares u with its reflection",
       with(kSolveOpts, {{"t", "level as a fraction of max u"}, {"tol", "comparison tolerance"}, {"svg", "figure"}}),
       cmd_reflect},
      {"sweep", "domains x p x reactions through the full concavity pipeline",
       {{"domains", "domain specs", true},
        {"p", "exponents", true},
        {"reactions", "reaction kinds", true},
        {"c", "power coefficient"},
        {"q", "power exponent"},
        {"table", "tabulated reaction CSV"},
        {"h", "mesh size"},
        {"refine", "also solve at h/2"},
        {"n_segments", "random segments"},
        {"n_levels", "level sets"},
        {"jobs", "worker threads, 0 for all cores"}},
       cmd_sweep},
  };
  return cmds;
}

std::string flag_name(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

bool usage_kind(ErrorKind k) {
  return k == ErrorKind::InvalidConfig || k == ErrorKind::InvalidBody || k == ErrorKind::EmptyBody ||
         k == ErrorKind::InvalidReaction || k == ErrorKind::InvalidAlpha;
}

}  // namespace

Outcome execute(const std::vector<std::string>& args, std::ostream& err) {
  CLI::App app{"Convex folding and p-Laplacian verification tool", "convfold"};
  app.require_subcommand(1, 1);
  app.set_help_flag("--help", "print usage");

  struct Bound {
    const Command* cmd;
    CLI::App* sub;
    std::map<std::string, std::vector<std::string>> lists;
    std::map<std::string, std::string> scalars;
    std::map<std::string, CLI::Option*> opts;
    std::string config, out, seed, which;
  };
  std::vector<Bound> bound(commands().size());
  for (std::size_t i = 0; i < commands().size(); ++i) {
    const auto& cmd = commands()[i];
    auto& b = bound[i];
    b.cmd = &cmd;
    b.sub = app.add_subcommand(cmd.name, cmd.help);
    if (cmd.name == "verify-lemma") {
      b.sub->add_option("lemma", b.which, "fold, section or rectangle")
          ->required()
          ->check(CLI::IsMember({"fold", "section", "rectangle"}));
    }
    b.sub->add_option("--config", b.config, "key = value file; flags override it");
    b.sub->add_option("--out", b.out, "report path (default: standard output)");
    b.opts["seed"] = b.sub->add_option("--seed", b.seed, "random seed");
    for (const auto& o : cmd.options) {
      if (o.list) {
        b.opts[o.key] = b.sub->add_option(flag_name(o.key), b.lists[o.key], o.help)->delimiter(',');
      } else {
        b.opts[o.key] = b.sub->add_option(flag_name(o.key), b.scalars[o.key], o.help);
      }
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    err << app.help();
    for (const auto& b : bound) {
      if (b.sub->parsed()) err << b.sub->help();
    }
    return {kPass, json(), {}};
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return {kUsage, json(), {}};
  }

  const Bound* active = nullptr;
  for (const auto& b : bound) {
    if (b.sub->parsed()) active = &b;
  }
  const auto& cmd = *active->cmd;

  Outcome outcome;
  try {
    ConfigEntries entries;
    if (!active->config.empty()) entries = read_config_file(active->config);
    std::set<std::string> known{"seed", "out"};
    if (cmd.name == "verify-lemma") known.insert("which");
    for (const auto& o : cmd.options) known.insert(o.key);
    for (const auto& [k, v] : entries) {
      if (!known.count(k)) throw Error(ErrorKind::InvalidConfig, "unknown key '" + k + "' for " + cmd.name);
    }
    for (const auto& [key, opt] : active->opts) {
      if (opt->count() == 0) continue;
      if (active->lists.count(key)) {
        entries[key] = active->lists.at(key);
      } else if (key == "seed") {
        entries[key] = {active->seed};
      } else {
        entries[key] = {active->scalars.at(key)};
      }
    }
    if (!active->which.empty()) entries["which"] = {active->which};
    if (!active->out.empty()) entries["out"] = {active->out};
    const ExperimentConfig config(cmd.name, entries);
    const auto out_path = config.str("out", "");
    outcome.out_path = out_path;
    config.integer("seed", 7);
    outcome = cmd.handler(config);
    outcome.out_path = out_path;
  } catch (const Error& e) {
    if (usage_kind(e.kind())) {
      err << "error: " << e.what() << "\n" << active->sub->help();
      return {kUsage, json(), {}};
    }
    json rep{{"command", cmd.name}, {"passed", false}, {"error", error_json(e)}};
    err << "error: " << e.what() << "\n";
    return {kFail, rep, outcome.out_path};
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return {kFail, json{{"command", cmd.name}, {"passed", false}, {"error", error_json(e)}}, outcome.out_path};
  }
  return outcome;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto o = execute(args, err);
  if (o.report.is_null()) return o.code;
  const auto text = dump_report(o.report);
  if (o.out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(o.out_path, std::ios::binary);
    if (!f || !(f << text)) {
      err << "error: cannot write report to '" << o.out_path << "'\n";
      return kUsage;
    }
  }
  return o.code;
}

}  // namespace convfold::cli
