#include <cmath>
#include <optional>
#include <limits>

#include "srdp/cli.hpp"
#include "srdp/closed_forms.hpp"
#include "srdp/osrb.hpp"
#include "srdp/region_bc.hpp"
#include "srdp/region_noiseless.hpp"
#include "srdp/region_sideinfo.hpp"

namespace srdp::cli {

namespace {

// R_G3 rows with nu - rho^2 below this are marked as sitting on the divergence.
constexpr double kDivergenceFlag = 1e-6;

Cell num(double v) { return v; }
Cell count(std::size_t v) { return static_cast<std::uint64_t>(v); }

Matrix matrix_of(const Channel& ch) {
  Matrix m(ch.input_size(), std::vector<double>(ch.output_size()));
  for (std::size_t i = 0; i < ch.input_size(); ++i)
    for (std::size_t j = 0; j < ch.output_size(); ++j) m[i][j] = ch(i, j);
  return m;
}

Matrix row_of(const Pmf& p) { return {std::vector<double>(p.probs().begin(), p.probs().end())}; }

std::vector<double> linspace(double lo, double hi, std::size_t points) {
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i)
    v[i] = points == 1 ? lo
           : i + 1 == points
               ? hi
               : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return v;
}

void check_range(const Params& p, const std::string& lo, const std::string& hi,
                 const std::string& points) {
  if (!(p.num(lo) <= p.num(hi)) || !std::isfinite(p.num(lo)) || !std::isfinite(p.num(hi)))
    throw UsageError(lo + " <= " + hi + " (both finite) violated");
  if (p.count(points) == 0) throw UsageError(points + " must be >= 1");
  if (p.count(points) == 1 && p.num(lo) != p.num(hi))
    throw UsageError(points + " = 1 needs " + lo + " = " + hi);
}

DistortionMeasure distortion_of(const Params& p, std::size_t x_size) {
  if (p.str("distortion") == "hamming") return DistortionMeasure::hamming(x_size);
  return DistortionMeasure(p.matrix("distortion"));
}

// --- binary-surface ---------------------------------------------------------

Document binary_surface(const Params& p) {
  check_range(p, "r0_min", "r0_max", "r0_points");
  check_range(p, "d_min", "d_max", "d_points");
  if (p.num("r0_min") < 0.0 || p.num("d_min") < 0.0) throw UsageError("R0 and D must be >= 0");
  const std::size_t total = p.count("r0_points") * p.count("d_points");
  if (total > enumeration_cap())
    throw CapExceeded("binary surface grid: " + std::to_string(total) + " rows", double(total),
                      enumeration_cap());
  Document doc;
  doc.columns = {"R0", "D", "R_min"};
  for (double r0 : linspace(p.num("r0_min"), p.num("r0_max"), p.count("r0_points")))
    for (double d : linspace(p.num("d_min"), p.num("d_max"), p.count("d_points"))) {
      const auto r = binary_min_R(r0, d);
      doc.rows.push_back({num(r0), num(d), num(r ? *r : std::numeric_limits<double>::infinity())});
    }
  for (const auto& band : fig4_tradeoff_table().bands) {
    const std::string key = "saving_band_D" + format_number(band.D);
    doc.notes.emplace_back(key, "R0 +" + format_number(100 * band.increase_lo) + "% to +" +
                                    format_number(100 * band.increase_hi) + "% saves " +
                                    format_number(100 * band.saving_lo) + "% to " +
                                    format_number(100 * band.saving_hi) + "% of R (baseline: " +
                                    band.baseline + ")");
  }
  doc.notes.emplace_back("R_min", "inf marks (R0, D) outside the region");
  return doc;
}

// --- gaussian-family --------------------------------------------------------

Document gaussian_family(const Params& p) {
  const double eta = p.num("eta"), delta = p.num("delta");
  GaussianParams g{eta, delta, 0.5};
  const double rho2 = g.rho() * g.rho();
  std::vector<double> nus;
  if (p.has("nu_list")) {
    nus = p.list("nu_list");
  } else {
    const double lo = p.str("nu_min") == "auto" ? rho2 + 1e-8 : p.num("nu_min");
    const double hi = p.str("nu_max") == "auto" ? 1.0 - 1e-8 : p.num("nu_max");
    if (p.count("nu_points") == 0) throw UsageError("nu_points must be >= 1");
    nus = linspace(lo, hi, p.count("nu_points"));
  }
  // domain errors name the violated condition
  for (double nu : nus) {
    g.nu = nu;
    validate_gaussian(g);
  }
  Document doc;
  doc.columns = {"nu", "R_G1", "R_G2", "R_G3", "r3_divergent"};
  for (double nu : nus) {
    g.nu = nu;
    const GaussianRates r = gaussian_rates(g);
    doc.rows.push_back({num(nu), num(r.r1), num(r.r2), num(r.r3),
                        count(nu - rho2 <= kDivergenceFlag ? 1 : 0)});
  }
  doc.notes.emplace_back("rho", format_number(g.rho()));
  doc.notes.emplace_back("R_G1_limit_nu_to_rho2", format_number(gaussian_min_R_limit(eta, delta)));
  doc.notes.emplace_back("R_G3_limit_nu_to_rho2", "inf");
  doc.notes.emplace_back("zero_rate_threshold_delta", format_number(gaussian_zero_rate_threshold(eta)));
  doc.notes.emplace_back("r3_divergent", "1 when nu - rho^2 <= " + format_number(kDivergenceFlag));
  return doc;
}

// --- region-search ----------------------------------------------------------

std::vector<RateTuple> targets_of(const Params& p) {
  std::vector<RateTuple> out;
  for (const auto& row : p.matrix("targets")) {
    if (row.size() != 3) throw UsageError("targets: each target is R,R0,D");
    out.push_back({row[0], row[1], row[2]});
  }
  return out;
}

JointPmf side_source(const Params& p, const Pmf& source) {
  if (!p.has("side_joint")) return JointPmf({source.size(), 1}, {source.probs().begin(), source.probs().end()});
  const Matrix m = p.matrix("side_joint");
  std::vector<double> cells;
  for (const auto& row : m) cells.insert(cells.end(), row.begin(), row.end());
  JointPmf j({m.size(), m.front().size()}, std::move(cells));
  const Pmf qx = marginal_pmf(j, 0);
  if (qx.size() != source.size() || tv_distance(qx, source) > 1e-9)
    throw UsageError("side_joint: X marginal differs from source");
  return j;
}

Document region_search(const Params& p, const RunConfig& rc) {
  const std::string mode = p.str("mode");
  const Pmf source(p.list("source"));
  const DistortionMeasure d = distortion_of(p, source.size());
  SearchConfig s;
  s.starts = p.count("starts");
  s.seed = rc.seed;
  s.u_size = p.count("u_size");
  s.jobs = rc.jobs;
  const auto targets = targets_of(p);

  Document doc;
  doc.columns = {"target_R", "target_R0", "target_D", "verdict"};
  auto head = [](const RateTuple& t, bool found) {
    return std::vector<Cell>{num(t.R), num(t.R0), num(t.D),
                             std::string(found ? "certified" : "not_found")};
  };
  if (mode == "noiseless") {
    for (const char* c : {"R", "R0", "D", "u_channel", "y_channel"}) doc.columns.push_back(c);
    for (const auto& t : targets) {
      const auto w = certify_achievable(source, d, t, s);
      auto row = head(t, w.has_value());
      if (w) {
        const RateTuple c = evaluate_witness(*w, d);
        if (!dominated_by(c, t)) throw std::runtime_error("certified witness does not admit target");
        for (Cell v : {num(c.R), num(c.R0), num(c.D), Cell(matrix_of(w->u_channel)),
                       Cell(matrix_of(w->y_channel))})
          row.push_back(std::move(v));
      } else {
        row.resize(doc.columns.size());
      }
      doc.rows.push_back(std::move(row));
    }
    return doc;
  }
  if (mode != "si_both" && mode != "si_dec")
    throw UsageError("mode must be noiseless, si_both or si_dec");
  const JointPmf xz = side_source(p, source);
  for (const char* c : {"R_min", "R0_min", "sum_min", "D", "kind"}) doc.columns.push_back(c);
  if (mode == "si_both") {
    doc.columns.push_back("uy_channel");
  } else {
    doc.columns.push_back("u_channel");
    doc.columns.push_back("y_channel");
  }
  for (const auto& t : targets) {
    std::optional<SiPoint> pt;
    std::vector<Cell> tables;
    if (mode == "si_both") {
      if (const auto w = certify_si_both(xz, d, t, s)) {
        pt = si_both_point(*w, d);
        tables = {matrix_of(w->uy_channel)};
      }
    } else if (const auto w = certify_si_dec(xz, d, t, s)) {
      pt = si_dec_point(*w, d);
      tables = {matrix_of(w->u_channel), matrix_of(w->y_channel)};
    }
    auto row = head(t, pt.has_value());
    if (pt) {
      if (!pt->admits(t, kCertifyTol)) throw std::runtime_error("certified witness does not admit target");
      for (Cell v : {num(pt->R_min), num(pt->R0_min), num(pt->sum_min), num(pt->D),
                     Cell(std::string(to_string(pt->kind)))})
        row.push_back(std::move(v));
      for (auto& v : tables) row.push_back(std::move(v));
    } else {
      row.resize(doc.columns.size());
    }
    doc.rows.push_back(std::move(row));
  }
  return doc;
}

// --- bc-tools ---------------------------------------------------------------

Document bc_tools(const Params& p, const RunConfig& rc) {
  const Channel y(p.matrix("y_channel")), z(p.matrix("z_channel"));
  const BroadcastChannel bc = BroadcastChannel::product(y, z);
  CheckConfig cc;
  cc.random_inputs = p.count("random_inputs");
  cc.seed = rc.seed;
  cc.jobs = rc.jobs;
  const MoreCapableReport report = more_capable_check(bc, cc);
  const CapacityResult cap = blahut_arimoto(y);
  if (!cap.converged)
    throw NonConvergence("Blahut-Arimoto stopped with gap " + format_number(cap.gap), cap.gap);
  const double kappa = p.num("kappa");
  const double R = p.has("rate") ? p.num("rate") : cap.capacity;
  const bool feasible = separation_feasible(MismatchFactor(kappa), R, y);

  Document doc;
  doc.columns = {"more_capable", "min_gap", "inputs_checked", "violating_input",
                 "degradation_residual", "C_unsecure", "capacity_gap", "R_lo", "R_hi",
                 "R0_min", "D", "region_empty", "R", "kappa", "separation_feasible"};
  std::vector<Cell> row = {std::string(to_string(report.status)), num(report.min_gap),
                           count(report.inputs_checked)};
  row.push_back(report.witness ? Cell(row_of(*report.witness)) : Cell{});
  row.push_back(report.status == MoreCapable::certified_degraded ? num(report.degradation_residual)
                                                                 : Cell{});
  row.push_back(num(cap.capacity));
  row.push_back(num(cap.gap));
  const bool want_point = p.has("w_source") || p.has("w_u_channel") || p.has("w_y_channel");
  if (want_point && report.status != MoreCapable::violated) {
    const auto w = make_noiseless_witness(Pmf(p.list("w_source")), Channel(p.matrix("w_u_channel")),
                                          Channel(p.matrix("w_y_channel")));
    const Pmf x_dist = p.has("x_dist") ? Pmf(p.list("x_dist")) : cap.input;
    const BcPoint pt = more_capable_region_point(w, x_dist, bc, distortion_of(p, w.source.size()), cc);
    for (Cell v : {num(pt.R_lo), num(pt.R_hi), num(pt.R0_min), num(pt.D), count(pt.empty ? 1 : 0)})
      row.push_back(std::move(v));
  } else {
    row.resize(row.size() + 5);
  }
  row.push_back(num(R));
  row.push_back(num(kappa));
  row.push_back(count(feasible ? 1 : 0));
  doc.rows.push_back(std::move(row));
  if (want_point && report.status == MoreCapable::violated)
    doc.notes.emplace_back("corner", "skipped: the channel is not more capable");
  return doc;
}

// --- osrb -------------------------------------------------------------------

Document osrb(const Params& p, const RunConfig& rc) {
  NoiselessWitness w;
  if (p.has("source") || p.has("u_channel") || p.has("y_channel")) {
    w = make_noiseless_witness(Pmf(p.list("source")), Channel(p.matrix("u_channel")),
                               Channel(p.matrix("y_channel")));
  } else {
    w = make_noiseless_witness(Pmf::uniform(2), Channel::bsc(p.num("alpha")),
                               Channel::bsc(p.num("beta")));
  }
  const DistortionMeasure d = distortion_of(p, w.source.size());
  const RateTuple corner = evaluate_witness(w, d);
  const double offset = p.num("rate_offset");
  const double R = p.has("R") ? p.num("R") : corner.R + offset;
  const double R0 = p.has("R0") ? p.num("R0") : corner.R0 + offset;
  OsrbConfig base = osrb_config(w, 1, R, R0, rc.seed);
  base.distortion = d;
  std::vector<std::size_t> n_list;
  for (double v : p.list("n_list")) {
    if (!(v >= 1.0) || v != std::floor(v)) throw UsageError("n_list entries must be integers >= 1");
    n_list.push_back(static_cast<std::size_t>(v));
  }
  const SweepResult sweep = rate_sweep_experiment(base, n_list, p.count("seeds"), rc.jobs);

  Document doc;
  doc.columns = {"n", "eff_R", "eff_R0", "seed", "realism_tv", "distortion", "leakage_bits",
                 "cr_independence_tv", "fallback_count"};
  for (const OsrbMetrics& m : sweep.runs)
    doc.rows.push_back({count(m.n), num(m.eff_R), num(m.eff_R0), Cell(m.seed), num(m.realism_tv),
                        num(m.avg_distortion), num(m.leakage_bits), num(m.cr_independence_tv),
                        count(m.fallback_count)});
  doc.notes.emplace_back("corner", "R=" + format_number(corner.R) + " R0=" + format_number(corner.R0) +
                                       " D=" + format_number(corner.D));
  doc.notes.emplace_back("rates", "R=" + format_number(R) + " R0=" + format_number(R0));
  for (const TrendRow& t : sweep.trend)
    doc.notes.emplace_back(
        "median_n" + std::to_string(t.n),
        "realism_tv=" + format_number(t.realism_tv.median) + " distortion=" +
            format_number(t.avg_distortion.median) + " leakage_bits=" + format_number(t.leakage_bits.median) +
            " cr_independence_tv=" + format_number(t.cr_independence_tv.median) +
            " unreliable_runs=" + std::to_string(t.unreliable_runs));
  return doc;
}

}  // namespace

std::vector<std::string> command_names() {
  return {"binary-surface", "gaussian-family", "region-search", "bc-tools", "osrb"};
}

std::vector<ParamSpec> command_schema(const std::string& command) {
  if (command == "binary-surface")
    return {{"r0_min", "0", "smallest R0"},      {"r0_max", "1", "largest R0"},
            {"r0_points", "50", "R0 grid points"}, {"d_min", "0", "smallest D"},
            {"d_max", "0.5", "largest D"},       {"d_points", "50", "D grid points"}};
  if (command == "gaussian-family")
    return {{"eta", "0", "correlation of X and Z"},
            {"delta", "1", "distortion Delta"},
            {"nu_min", "auto", "smallest nu; auto is rho^2 + 1e-8"},
            {"nu_max", "auto", "largest nu; auto is 1 - 1e-8"},
            {"nu_points", "20", "nu grid points"},
            {"nu_list", "", "comma-separated nu values, replaces the grid"}};
  if (command == "region-search")
    return {{"mode", "noiseless", "noiseless, si_both or si_dec"},
            {"source", "0.5,0.5", "Q_X"},
            {"side_joint", "", "Q_XZ rows x, columns z; empty means constant Z"},
            {"distortion", "hamming", "hamming or a matrix"},
            {"targets", "1,1,0", "R,R0,D triples separated by ';'"},
            {"starts", "32", "multistart count"},
            {"u_size", "0", "auxiliary alphabet size; 0 uses the cap"}};
  if (command == "bc-tools")
    return {{"y_channel", "0.89,0.11;0.11,0.89", "P_{Y~|X~}"},
            {"z_channel", "0.8,0.2;0.2,0.8", "P_{Z~|X~}"},
            {"kappa", "1", "bandwidth mismatch factor"},
            {"rate", "", "R tested against kappa C; empty uses C"},
            {"random_inputs", "1000", "sampled input laws for the more-capable check"},
            {"w_source", "", "witness Q_X"},
            {"w_u_channel", "", "witness P_{W1|X}"},
            {"w_y_channel", "", "witness P_{Y|W1}"},
            {"x_dist", "", "channel input law; empty uses the capacity-achieving one"},
            {"distortion", "hamming", "hamming or a matrix"}};
  if (command == "osrb")
    return {{"alpha", "0.2", "X -> U crossover of the binary cascade"},
            {"beta", "0.2", "U -> Y crossover of the binary cascade"},
            {"source", "", "Q_X of a general witness"},
            {"u_channel", "", "P_{U|X} of a general witness"},
            {"y_channel", "", "P_{Y|U} of a general witness"},
            {"distortion", "hamming", "hamming or a matrix"},
            {"R", "", "message rate; empty is corner + rate_offset"},
            {"R0", "", "common-randomness rate; empty is corner + rate_offset"},
            {"rate_offset", "0.15", "slack above the witness corner"},
            {"n_list", "2,4,6,8", "blocklengths"},
            {"seeds", "20", "codebooks per blocklength"}};
  throw UsageError("unknown command '" + command + "'");
}

Document run_command(const std::string& command, const Params& params, const RunConfig& rc) {
  Document doc;
  if (command == "binary-surface") doc = binary_surface(params);
  else if (command == "gaussian-family") doc = gaussian_family(params);
  else if (command == "region-search") doc = region_search(params, rc);
  else if (command == "bc-tools") doc = bc_tools(params, rc);
  else if (command == "osrb") doc = osrb(params, rc);
  else throw UsageError("unknown command '" + command + "'");
  doc.command = command;
  doc.parameters = params.entries();
  doc.parameters.emplace_back("seed", std::to_string(rc.seed));
  doc.parameters.emplace_back("format", rc.format);
  return doc;
}

}  // namespace srdp::cli
