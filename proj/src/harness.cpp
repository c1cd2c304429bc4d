#include "zzct/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace zzct {

namespace {

Vec json_to_vec(const json& j) {
  Vec v(j.size());
  Eigen::Index i = 0;
  for (const auto& e : j) v[i++] = e.get<double>();
  return v;
}

json vec_to_json(const Vec& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Mat json_to_mat(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) throw std::invalid_argument("config: empty matrix");
  const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("config: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json mat_to_json(const Mat& m) {
  json j = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Horizon parse_horizon(const json& j) {
  if (j.contains("events"))
    return Horizon::events(j.at("events").get<std::uint64_t>());
  if (j.contains("path_time"))
    return Horizon::path_time(j.at("path_time").get<double>());
  throw std::invalid_argument("config /horizon: need events or path_time");
}

json horizon_to_json(const Horizon& h) {
  if (h.kind == Horizon::Kind::Events)
    return json{{"events", static_cast<std::uint64_t>(h.value)}};
  return json{{"path_time", h.value}};
}

Horizon horizon_fraction(const Horizon& h, double frac) {
  if (h.kind == Horizon::Kind::Events)
    return Horizon::events(
        static_cast<std::uint64_t>(std::llround(h.value * frac)));
  return Horizon::path_time(h.value * frac);
}

KappaChoice parse_kappa(const json& j) {
  KappaChoice k;
  if (j.contains("psi")) {
    k.kind = KappaChoice::Kind::Explicit;
    k.psi = json_to_vec(j.at("psi"));
  } else if (j.contains("calibrate")) {
    k.kind = KappaChoice::Kind::Calibrate;
    const json& c = j.at("calibrate");
    k.grid = c.value("grid", 15);
    k.degree = c.value("degree", 4);
    k.fixed_grid = c.value("fixed_grid", false);
    k.chain_events = c.value("chain_events", std::uint64_t{4000});
  } else if (j.contains("xi")) {
    k.kind = KappaChoice::Kind::Xi;
    k.xi = j.at("xi").get<double>();
  } else {
    throw std::invalid_argument("config /kappa: need psi, calibrate, or xi");
  }
  return k;
}

json kappa_to_json(const KappaChoice& k) {
  switch (k.kind) {
    case KappaChoice::Kind::Explicit:
      return json{{"psi", vec_to_json(k.psi)}};
    case KappaChoice::Kind::Calibrate:
      return json{{"calibrate",
                   {{"grid", k.grid},
                    {"degree", k.degree},
                    {"fixed_grid", k.fixed_grid},
                    {"chain_events", k.chain_events}}}};
    case KappaChoice::Kind::Xi:
      return json{{"xi", k.xi}};
  }
  return {};
}

}  // namespace

RunConfig parse_config(const json& j) {
  try {
    RunConfig c;
    c.model = j.at("model");
    c.base = j.value("base", json());
    c.alpha = j.value("alpha", 1.0);
    if (c.alpha < 0.0 || c.alpha > 1.0)
      throw std::invalid_argument("config /alpha: outside [0,1]");
    if (j.contains("kappa")) c.kappa = parse_kappa(j.at("kappa"));
    if (j.contains("horizon")) c.horizon = parse_horizon(j.at("horizon"));
    c.burnin_fraction = j.value("burnin_fraction", 0.4);
    if (c.burnin_fraction < 0.0 || c.burnin_fraction >= 1.0)
      throw std::invalid_argument("config /burnin_fraction: outside [0,1)");
    c.seed = j.value("seed", std::uint64_t{1});
    c.replicates = j.value("replicates", 1);
    if (c.replicates < 1)
      throw std::invalid_argument("config /replicates: must be >= 1");
    c.dt = j.value("dt", 0.0);
    c.unstick_refresh = j.value("unstick_refresh", false);
    if (j.contains("init_x")) c.init_x = json_to_vec(j.at("init_x"));
    c.init_beta = j.value("init_beta", 0.5);
    return c;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

json config_to_json(const RunConfig& c) {
  json j{{"model", c.model},
         {"alpha", c.alpha},
         {"kappa", kappa_to_json(c.kappa)},
         {"horizon", horizon_to_json(c.horizon)},
         {"burnin_fraction", c.burnin_fraction},
         {"seed", c.seed},
         {"replicates", c.replicates},
         {"dt", c.dt},
         {"unstick_refresh", c.unstick_refresh},
         {"init_beta", c.init_beta}};
  if (!c.base.is_null()) j["base"] = c.base;
  if (c.init_x) j["init_x"] = vec_to_json(*c.init_x);
  return j;
}

GaussianSpec boltzmann_default_base(const BoltzmannSpec& spec) {
  GaussianSpec g;
  g.mu = spec.Q.transpose() * spec.b.array().tanh().matrix();
  g.sigma = spec.Q.transpose() * spec.Q +
            Mat::Identity(spec.Q.cols(), spec.Q.cols());
  return g;
}

namespace {

BoltzmannSpec boltzmann_spec_from_json(const json& spec) {
  const double jitter = spec.value("jitter", 0.1);
  if (spec.contains("random")) {
    const json& r = spec.at("random");
    const int d = r.at("d").get<int>();
    Rng rng(r.at("seed").get<std::uint64_t>());
    const double ws = r.value("w_scale", 0.4);
    const double bs = r.value("b_scale", 0.2);
    Mat W = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int k = i + 1; k < d; ++k) W(i, k) = W(k, i) = ws * rng.normal();
    Vec b(d);
    for (int i = 0; i < d; ++i) b[i] = bs * rng.normal();
    return build_Q(W, b, jitter);
  }
  return build_Q(json_to_mat(spec.at("W")), json_to_vec(spec.at("b")), jitter);
}

}  // namespace

std::unique_ptr<TargetModel> build_model(const json& spec,
                                         const json* target_for_auto) {
  const std::string type = spec.at("type").get<std::string>();
  if (type == "gaussian") {
    GaussianSpec g;
    g.mu = json_to_vec(spec.at("mu"));
    if (spec.contains("sigma")) {
      g.sigma = json_to_mat(spec.at("sigma"));
    } else if (spec.contains("sigma_diag")) {
      g.sigma = json_to_vec(spec.at("sigma_diag")).asDiagonal();
    } else if (spec.contains("sigma_scalar")) {
      g.sigma = spec.at("sigma_scalar").get<double>() *
                Mat::Identity(g.mu.size(), g.mu.size());
    } else {
      throw std::invalid_argument("config /model: gaussian needs a sigma");
    }
    return std::make_unique<GaussianModel>(std::move(g));
  }
  if (type == "mixture") {
    MixtureSpec m;
    for (const auto& row : spec.at("means")) m.means.push_back(json_to_vec(row));
    m.sigma2 = spec.at("sigma2").get<double>();
    return std::make_unique<MixtureModel>(std::move(m));
  }
  if (type == "boltzmann")
    return std::make_unique<BoltzmannModel>(boltzmann_spec_from_json(spec));
  if (type == "auto") {
    if (!target_for_auto ||
        target_for_auto->at("type").get<std::string>() != "boltzmann")
      throw std::invalid_argument(
          "config /base: auto base requires a boltzmann model");
    return std::make_unique<GaussianModel>(
        boltzmann_default_base(boltzmann_spec_from_json(*target_for_auto)));
  }
  if (type == "spikeslab")
    throw std::invalid_argument(
        "config /model: spikeslab runs through the sticky sampler");
  throw std::invalid_argument("config /model: unknown type " + type);
}

LogKappa calibrate_fixed_grid(const GeometricPath& path, int grid_n,
                              int degree, std::uint64_t chain_events,
                              Rng& rng, json* detail) {
  Vec grid(grid_n);
  for (int i = 0; i < grid_n; ++i)
    grid[i] = 0.01 + (0.99 - 0.01) * static_cast<double>(i) /
                         static_cast<double>(grid_n - 1);
  Vec ubar(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    BlendedModel bm(path, grid[i]);
    Vec x0 = path.base->can_sample() ? path.base->sample(rng)
                                     : Vec::Zero(path.dim());
    Vec v0(path.dim());
    for (Eigen::Index k = 0; k < v0.size(); ++k) v0[k] = rng.rademacher();
    ExtendedState init(x0, v0, 1.0, 0.0, Mode::Untempered);
    const Skeleton sk =
        run_zigzag(bm, init, Horizon::events(chain_events), rng);
    const double burn = 0.3 * sk.total_time;
    const double dt = (sk.total_time - burn) / 800.0;
    double acc = 0.0;
    std::size_t n = 0;
    for (const ExtendedState& s : discretize(sk, dt, burn)) {
      acc += path.dbeta(s.x);
      ++n;
    }
    ubar[i] = acc / static_cast<double>(n);
  }
  LogKappa out = calibrate_kappa(grid, ubar, degree);
  if (detail) {
    (*detail)["grid"] = vec_to_json(grid);
    (*detail)["ubar"] = vec_to_json(ubar);
  }
  return out;
}

LogKappa calibrate_from_pilot(const Skeleton& pilot, const GeometricPath& path,
                              int grid_n, int degree, json* detail) {
  Vec grid(grid_n);
  for (int i = 0; i < grid_n; ++i)
    grid[i] = static_cast<double>(i) / static_cast<double>(grid_n - 1);
  const double dt = pilot.total_time / 5000.0;
  const std::vector<ExtendedState> samples = discretize(pilot, dt, 0.0);
  const Vec ubar = estimate_ubar(samples, path, grid);
  LogKappa out = calibrate_kappa(grid, ubar, degree);
  if (detail) {
    (*detail)["grid"] = vec_to_json(grid);
    (*detail)["ubar"] = vec_to_json(ubar);
  }
  return out;
}

namespace {

void put_moments(json& summary, const Skeleton& sk, Eigen::Index d,
                 double burnin) {
  Vec mean(d), second(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    mean[i] = segment_moment(sk, static_cast<int>(i), 1,
                             ModeFilter::target_only(), burnin);
    second[i] = segment_moment(sk, static_cast<int>(i), 2,
                               ModeFilter::target_only(), burnin);
  }
  summary["estimator"] = "target_time";
  summary["mean"] = vec_to_json(mean);
  summary["second_moment"] = vec_to_json(second);
}

void put_counts(json& summary, const Skeleton& sk, double burnin) {
  summary["total_time"] = sk.total_time;
  summary["events"] = sk.events.size() >= 2 ? sk.events.size() - 2 : 0;
  summary["proposals"] = sk.proposal_count;
  summary["accepted"] = sk.accepted_count;
  summary["thinning_efficiency"] =
      sk.proposal_count
          ? static_cast<double>(sk.accepted_count) /
                static_cast<double>(sk.proposal_count)
          : 1.0;
  summary["occupancy"] = beta_occupancy(sk, burnin);
}

ReplicateOutput sticky_replicate(const RunConfig& cfg, std::uint64_t seed_r,
                                 bool keep_skeleton) {
  const json& m = cfg.model;
  SpikeSlabSpec spec;
  spec.d = m.at("d").get<int>();
  spec.w = m.at("w").get<double>();
  spec.m = m.at("m").get<double>();
  spec.sigma2 = m.at("sigma2").get<double>();
  StickyOptions opts;
  opts.alpha = cfg.alpha;
  opts.refresh_velocity_on_unstick = cfg.unstick_refresh;

  Rng rng(seed_r);
  const double sd = std::sqrt(spec.sigma2);
  const bool untempered = cfg.alpha >= 1.0;
  const double beta0 = untempered ? 1.0 : cfg.init_beta;
  Vec x0(spec.d), v0(spec.d);
  for (int i = 0; i < spec.d; ++i) {
    x0[i] = spec.m * beta0 + sd * rng.normal();
    v0[i] = rng.rademacher();
  }
  if (cfg.init_x) x0 = *cfg.init_x;
  ExtendedState init =
      untempered
          ? ExtendedState(x0, v0, 1.0, 0.0, Mode::Target)
          : ExtendedState(x0, v0, beta0, rng.rademacher(), Mode::Tempering);

  Skeleton sk = run_sticky_tempered(spec, opts, init, cfg.horizon, rng);
  const double burnin = cfg.burnin_fraction * sk.total_time;

  ReplicateOutput out;
  out.summary["seed"] = seed_r;
  put_counts(out.summary, sk, burnin);
  put_moments(out.summary, sk, spec.d, burnin);
  Vec incl(spec.d);
  for (int i = 0; i < spec.d; ++i)
    incl[i] = inclusion_fraction(sk, i, ModeFilter::target_only(), burnin);
  out.summary["inclusion"] = vec_to_json(incl);
  if (keep_skeleton) out.skeleton = std::move(sk);
  return out;
}

}  // namespace

ReplicateOutput run_replicate(const RunConfig& cfg, int replicate_index,
                              bool keep_skeleton) {
  const std::uint64_t seed_r =
      derive_seed(cfg.seed, static_cast<std::uint64_t>(replicate_index));
  const std::string type = cfg.model.at("type").get<std::string>();
  if (type == "spikeslab") return sticky_replicate(cfg, seed_r, keep_skeleton);

  Rng rng(seed_r);
  const std::unique_ptr<TargetModel> target = build_model(cfg.model);
  const Eigen::Index d = target->dim();

  // plain sampler at alpha = 1
  if (cfg.alpha >= 1.0) {
    std::unique_ptr<TargetModel> base;
    if (!cfg.base.is_null()) base = build_model(cfg.base, &cfg.model);
    Vec x0;
    if (cfg.init_x) {
      x0 = *cfg.init_x;
    } else if (base && base->can_sample()) {
      x0 = base->sample(rng);
    } else if (target->can_sample()) {
      x0 = target->sample(rng);
    } else {
      x0 = Vec::Zero(d);
    }
    Vec v0(d);
    for (Eigen::Index i = 0; i < d; ++i) v0[i] = rng.rademacher();
    ExtendedState init(x0, v0, 1.0, 0.0, Mode::Untempered);
    Skeleton sk = run_zigzag(*target, init, cfg.horizon, rng);
    const double burnin = cfg.burnin_fraction * sk.total_time;
    ReplicateOutput out;
    out.summary["seed"] = seed_r;
    put_counts(out.summary, sk, burnin);
    put_moments(out.summary, sk, d, burnin);
    if (keep_skeleton) out.skeleton = std::move(sk);
    return out;
  }

  if (cfg.base.is_null())
    throw std::invalid_argument("config /base: required when alpha < 1");
  const std::unique_ptr<TargetModel> base = build_model(cfg.base, &cfg.model);
  const GeometricPath path(*base, *target);

  TemperingConfig tc;
  tc.path = path;
  tc.alpha = cfg.alpha;

  json kappa_detail;
  Skeleton pilot;
  bool have_pilot = false;
  switch (cfg.kappa.kind) {
    case KappaChoice::Kind::Explicit:
      tc.kappa.psi = cfg.kappa.psi;
      break;
    case KappaChoice::Kind::Xi:
      if (cfg.alpha != 0.0)
        throw std::invalid_argument(
            "config /kappa: xi regime requires alpha = 0");
      tc.kappa = LogKappa::from_xi(cfg.kappa.xi);
      break;
    case KappaChoice::Kind::Calibrate:
      if (cfg.kappa.fixed_grid) {
        tc.kappa = calibrate_fixed_grid(path, cfg.kappa.grid, cfg.kappa.degree,
                                        cfg.kappa.chain_events, rng,
                                        &kappa_detail);
      }
      // pilot-phase calibration happens below, after the pilot run
      break;
  }

  Vec x0 = cfg.init_x ? *cfg.init_x
                      : (base->can_sample() ? base->sample(rng) : Vec::Zero(d));
  Vec v0(d);
  for (Eigen::Index i = 0; i < d; ++i) v0[i] = rng.rademacher();
  ExtendedState init(x0, v0, cfg.init_beta, rng.rademacher(), Mode::Tempering);

  const bool pilot_calibrate =
      cfg.kappa.kind == KappaChoice::Kind::Calibrate && !cfg.kappa.fixed_grid;
  Horizon main_horizon = cfg.horizon;
  double est_burnin_frac = cfg.burnin_fraction;
  if (pilot_calibrate) {
    TemperingConfig pc = tc;
    pc.kappa = LogKappa::constant();
    pilot = run_tempered_zigzag(
        pc, init, horizon_fraction(cfg.horizon, cfg.burnin_fraction), rng);
    have_pilot = true;
    tc.kappa = calibrate_from_pilot(pilot, path, cfg.kappa.grid,
                                    cfg.kappa.degree, &kappa_detail);
    init = pilot.events.back().state;
    main_horizon = horizon_fraction(cfg.horizon, 1.0 - cfg.burnin_fraction);
    est_burnin_frac = 0.0;  // the pilot was the burn-in
  }

  Skeleton sk = run_tempered_zigzag(tc, init, main_horizon, rng);
  const double burnin = est_burnin_frac * sk.total_time;

  ReplicateOutput out;
  out.summary["seed"] = seed_r;
  out.summary["kappa_psi"] = vec_to_json(tc.kappa.psi);
  if (!kappa_detail.is_null()) out.summary["calibration"] = kappa_detail;
  put_counts(out.summary, sk, burnin);

  if (cfg.alpha == 0.0) {
    // no point mass: self-normalized importance estimates over samples
    const double dt =
        cfg.dt > 0.0 ? cfg.dt : (sk.total_time - burnin) / 20000.0;
    std::vector<std::pair<Vec, double>> samples;
    for (const ExtendedState& s : discretize(sk, dt, burnin))
      samples.emplace_back(s.x, s.beta);
    const double xi =
        cfg.kappa.kind == KappaChoice::Kind::Xi ? cfg.kappa.xi : 1.0;
    Vec mean(d), second(d), se_mean(d), se_second(d);
    double ess = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto fi = [i](const Vec& x) { return x[i]; };
      const auto fi2 = [i](const Vec& x) { return x[i] * x[i]; };
      const IsEstimate m1 = is_estimate_batched(samples, path, xi, fi);
      const IsEstimate m2 = is_estimate_batched(samples, path, xi, fi2);
      mean[i] = m1.value;
      second[i] = m2.value;
      se_mean[i] = m1.se;
      se_second[i] = m2.se;
      ess = m1.ess;
    }
    out.summary["estimator"] = "importance";
    out.summary["mean"] = vec_to_json(mean);
    out.summary["second_moment"] = vec_to_json(second);
    out.summary["is_se_mean"] = vec_to_json(se_mean);
    out.summary["is_se_second"] = vec_to_json(se_second);
    out.summary["is_ess"] = ess;
    out.summary["is_xi"] = xi;
  } else {
    put_moments(out.summary, sk, d, burnin);
  }
  if (keep_skeleton) out.skeleton = std::move(sk);
  return out;
}

namespace {

// order-independent aggregate over successful replicates
json aggregate_summaries(const std::vector<json>& results, int n) {
  int ok = 0;
  double occ = 0.0, eff = 0.0;
  Vec mean, second;
  for (const json& r : results) {
    if (r.contains("error")) continue;
    ++ok;
    occ += r.at("occupancy").get<double>();
    eff += r.at("thinning_efficiency").get<double>();
    const Vec m = json_to_vec(r.at("mean"));
    const Vec s = json_to_vec(r.at("second_moment"));
    if (mean.size() == 0) {
      mean = Vec::Zero(m.size());
      second = Vec::Zero(s.size());
    }
    mean += m;
    second += s;
  }
  json agg;
  agg["succeeded"] = ok;
  agg["partial"] = ok < n;
  if (ok > 0) {
    agg["occupancy"] = occ / ok;
    agg["thinning_efficiency"] = eff / ok;
    agg["mean"] = vec_to_json(mean / ok);
    agg["second_moment"] = vec_to_json(second / ok);
  }
  return agg;
}

}  // namespace

json run_replicates(const RunConfig& cfg, int threads) {
  const int n = cfg.replicates;
  std::vector<json> results(static_cast<std::size_t>(n));
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int r = 0; r < n; ++r) {
      try {
        results[static_cast<std::size_t>(r)] =
            run_replicate(cfg, r, false).summary;
      } catch (const std::exception& e) {
        results[static_cast<std::size_t>(r)] = json{{"error", e.what()}};
      }
    }
  } else {
    std::atomic<int> next{0};
    auto work = [&]() {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= n) return;
        try {
          results[static_cast<std::size_t>(r)] =
              run_replicate(cfg, r, false).summary;
        } catch (const std::exception& e) {
          results[static_cast<std::size_t>(r)] = json{{"error", e.what()}};
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  json out;
  out["config"] = config_to_json(cfg);
  out["replicates"] = results;
  out["aggregate"] = aggregate_summaries(results, n);
  return out;
}

void write_skeleton_csv(const Skeleton& sk, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + path);
  const Eigen::Index d = sk.events.empty() ? 0 : sk.events[0].state.dim();
  std::string header = "t,mode,beta,v_beta";
  for (Eigen::Index i = 1; i <= d; ++i)
    header += ",x_" + std::to_string(i);
  for (Eigen::Index i = 1; i <= d; ++i)
    header += ",v_" + std::to_string(i);
  header += ",event_kind\n";
  std::fputs(header.c_str(), f);
  for (const SkeletonEvent& e : sk.events) {
    std::string line = fmt17(e.t);
    line += ",";
    line += mode_name(e.state.mode);
    line += "," + fmt17(e.state.beta) + "," + fmt17(e.state.v_beta);
    for (Eigen::Index i = 0; i < d; ++i)
      line += "," + fmt17(e.state.x[i]);
    for (Eigen::Index i = 0; i < d; ++i)
      line += "," + fmt17(e.state.is_stuck(i) ? 0.0 : e.state.v[i]);
    line += ",";
    line += event_kind_name(e.kind);
    line += "\n";
    std::fputs(line.c_str(), f);
  }
  std::fclose(f);
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

json cmd_run(const RunConfig& cfg, const std::string& out_dir, int threads) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  json out;
  out["config"] = config_to_json(cfg);
  std::vector<json> summaries(static_cast<std::size_t>(cfg.replicates));
  std::vector<Skeleton> skeletons(static_cast<std::size_t>(cfg.replicates));
  const int workers = std::max(1, std::min(threads, cfg.replicates));
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= cfg.replicates) return;
      ReplicateOutput ro = run_replicate(cfg, r, true);
      summaries[static_cast<std::size_t>(r)] = std::move(ro.summary);
      skeletons[static_cast<std::size_t>(r)] = std::move(ro.skeleton);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (int r = 0; r < cfg.replicates; ++r) {
    const std::string name =
        cfg.replicates == 1 ? "skeleton.csv"
                            : "skeleton_" + std::to_string(r) + ".csv";
    write_skeleton_csv(skeletons[static_cast<std::size_t>(r)],
                       (fs::path(out_dir) / name).string());
    summaries[static_cast<std::size_t>(r)]["skeleton_csv"] = name;
  }
  out["replicates"] = summaries;
  out["aggregate"] = aggregate_summaries(summaries, cfg.replicates);
  const auto t1 = std::chrono::steady_clock::now();
  // nondeterministic by nature; determinism checks ignore this field
  out["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
  write_json(out, (fs::path(out_dir) / "summary.json").string());
  return out;
}

json cmd_calibrate(const RunConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  if (cfg.base.is_null())
    throw std::invalid_argument("config /base: calibrate needs a base");
  const std::unique_ptr<TargetModel> target = build_model(cfg.model);
  const std::unique_ptr<TargetModel> base = build_model(cfg.base, &cfg.model);
  const GeometricPath path(*base, *target);
  Rng rng(cfg.seed);

  json detail;
  LogKappa kappa;
  if (cfg.kappa.kind == KappaChoice::Kind::Calibrate && cfg.kappa.fixed_grid) {
    kappa = calibrate_fixed_grid(path, cfg.kappa.grid, cfg.kappa.degree,
                                 cfg.kappa.chain_events, rng, &detail);
  } else {
    // constant-kappa pilot over the full configured horizon
    TemperingConfig tc;
    tc.path = path;
    tc.alpha = cfg.alpha > 0.0 ? cfg.alpha : 0.5;
    tc.kappa = LogKappa::constant();
    Vec x0 = base->can_sample() ? base->sample(rng) : Vec::Zero(path.dim());
    Vec v0(path.dim());
    for (Eigen::Index i = 0; i < v0.size(); ++i) v0[i] = rng.rademacher();
    ExtendedState init(x0, v0, cfg.init_beta, rng.rademacher(),
                       Mode::Tempering);
    const Skeleton pilot = run_tempered_zigzag(tc, init, cfg.horizon, rng);
    kappa = calibrate_from_pilot(pilot, path, cfg.kappa.grid, cfg.kappa.degree,
                                 &detail);
  }
  json out;
  out["psi"] = vec_to_json(kappa.psi);
  out["detail"] = detail;
  out["seed"] = cfg.seed;
  write_json(out, (fs::path(out_dir) / "kappa.json").string());
  return out;
}

json experiment_defaults(const std::string& name) {
  if (name == "mixture") {
    return json{
        {"name", "mixture"},
        {"model",
         {{"type", "mixture"},
          {"means",
           {{2.66, 3.72}, {5.73, 9.08}, {2.02, 8.98}, {9.45, 6.61},
            {6.29, 0.62}}},
          {"sigma2", 0.2}}},
        {"base",
         {{"type", "gaussian"}, {"mu", {5.0, 5.0}}, {"sigma_scalar", 2.0}}},
        {"alphas", {1.0, 0.5, 0.3, 0.1, 0.0}},
        {"xi", 1.0},
        {"horizon", {{"events", 50000}}},
        {"burnin_fraction", 0.4},
        {"replicates", 20},
        {"kappa_grid", 15},
        {"kappa_degree", 4},
        {"seed", 90210}};
  }
  if (name == "spikeslab") {
    return json{{"name", "spikeslab"},
                {"d", 2},
                {"w", 0.5},
                {"sigma2", 0.5},
                {"m_grid", {0.0, 1.0, 2.0, 3.0, 4.0}},
                {"alphas", {0.5, 1.0}},
                {"horizon", {{"events", 50000}}},
                {"burnin_fraction", 0.4},
                {"replicates", 10},
                {"seed", 424242}};
  }
  if (name == "boltzmann") {
    return json{{"name", "boltzmann"},
                {"model",
                 {{"type", "boltzmann"},
                  {"random",
                   {{"d", 8}, {"seed", 1234}, {"w_scale", 0.4},
                    {"b_scale", 0.2}}},
                  {"jitter", 0.1}}},
                {"base", {{"type", "auto"}}},
                {"alphas", {1.0, 0.2}},
                {"horizon", {{"events", 50000}}},
                {"burnin_fraction", 0.4},
                {"replicates", 10},
                {"kappa_grid", 15},
                {"kappa_degree", 4},
                {"chain_events", 4000},
                {"seed", 777}};
  }
  throw std::invalid_argument("unknown experiment: " + name);
}

namespace {

// estimates matrix (replicates x 2d: means then second moments)
Mat estimates_matrix(const json& replicates, Eigen::Index d) {
  std::vector<Vec> rows;
  for (const json& r : replicates) {
    if (r.contains("error")) continue;
    Vec row(2 * d);
    row.head(d) = json_to_vec(r.at("mean"));
    row.tail(d) = json_to_vec(r.at("second_moment"));
    rows.push_back(row);
  }
  Mat m(static_cast<Eigen::Index>(rows.size()), 2 * d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = rows[i];
  return m;
}

json moment_experiment_rows(const json& exp, const json& model_spec,
                            const json& base_spec, const Vec& exact_mean,
                            const Vec& exact_second, int threads) {
  const Eigen::Index d = exact_mean.size();
  Vec exact(2 * d);
  exact.head(d) = exact_mean;
  exact.tail(d) = exact_second;

  json rows = json::array();
  int row_idx = 0;
  for (const auto& aj : exp.at("alphas")) {
    const double alpha = aj.get<double>();
    RunConfig rc;
    rc.model = model_spec;
    rc.base = base_spec;
    rc.alpha = alpha;
    rc.horizon = parse_horizon(exp.at("horizon"));
    rc.burnin_fraction = exp.at("burnin_fraction").get<double>();
    rc.replicates = exp.at("replicates").get<int>();
    rc.seed = derive_seed(exp.at("seed").get<std::uint64_t>(),
                          static_cast<std::uint64_t>(10000 + row_idx));
    if (alpha == 0.0) {
      rc.kappa.kind = KappaChoice::Kind::Xi;
      rc.kappa.xi = exp.value("xi", 1.0);
    } else if (alpha < 1.0) {
      rc.kappa.kind = KappaChoice::Kind::Calibrate;
      rc.kappa.grid = exp.value("kappa_grid", 15);
      rc.kappa.degree = exp.value("kappa_degree", 4);
      rc.kappa.fixed_grid = exp.value("fixed_grid_calibration", false);
      rc.kappa.chain_events = exp.value("chain_events", std::uint64_t{4000});
    }
    const json study = run_replicates(rc, threads);
    const Mat est = estimates_matrix(study.at("replicates"), d);
    json row;
    row["alpha"] = alpha;
    row["replicate_summaries"] = study.at("replicates");
    row["partial"] = study.at("aggregate").at("partial");
    if (est.rows() > 0) {
      const Vec rmse = rmse_report(est, exact);
      row["rmse_mean"] = vec_to_json(rmse.head(d));
      row["rmse_second"] = vec_to_json(rmse.tail(d));
      row["rmse_mean_avg"] = rmse.head(d).mean();
      row["rmse_second_avg"] = rmse.tail(d).mean();
      row["occupancy"] = study.at("aggregate").at("occupancy");
      row["thinning_efficiency"] =
          study.at("aggregate").at("thinning_efficiency");
    }
    rows.push_back(row);
    ++row_idx;
  }
  return rows;
}

json experiment_mixture(const json& exp, int threads) {
  const std::unique_ptr<TargetModel> model = build_model(exp.at("model"));
  json out;
  out["experiment"] = "mixture";
  out["exact"] = json{{"mean", vec_to_json(model->exact_mean())},
                      {"second_moment", vec_to_json(model->exact_second_moment())}};
  out["rows"] =
      moment_experiment_rows(exp, exp.at("model"), exp.at("base"),
                             model->exact_mean(), model->exact_second_moment(),
                             threads);
  return out;
}

json experiment_boltzmann(const json& exp, int threads) {
  json e = exp;
  e["fixed_grid_calibration"] = true;
  const std::unique_ptr<TargetModel> model = build_model(e.at("model"));
  json out;
  out["experiment"] = "boltzmann";
  out["exact"] = json{{"mean", vec_to_json(model->exact_mean())},
                      {"second_moment", vec_to_json(model->exact_second_moment())}};
  out["rows"] =
      moment_experiment_rows(e, e.at("model"), e.at("base"),
                             model->exact_mean(), model->exact_second_moment(),
                             threads);
  return out;
}

json experiment_spikeslab(const json& exp, int threads) {
  json out;
  out["experiment"] = "spikeslab";
  const double w = exp.at("w").get<double>();
  out["exact_inclusion"] = w;
  json rows = json::array();
  int row_idx = 0;
  for (const auto& mj : exp.at("m_grid")) {
    for (const auto& aj : exp.at("alphas")) {
      const double m = mj.get<double>();
      const double alpha = aj.get<double>();
      RunConfig rc;
      rc.model = json{{"type", "spikeslab"},
                      {"d", exp.at("d")},
                      {"w", w},
                      {"m", m},
                      {"sigma2", exp.at("sigma2")}};
      rc.alpha = alpha;
      rc.horizon = parse_horizon(exp.at("horizon"));
      rc.burnin_fraction = exp.at("burnin_fraction").get<double>();
      rc.replicates = exp.at("replicates").get<int>();
      rc.seed = derive_seed(exp.at("seed").get<std::uint64_t>(),
                            static_cast<std::uint64_t>(20000 + row_idx));
      const json study = run_replicates(rc, threads);
      double mae = 0.0, mean_inc = 0.0;
      int ok = 0;
      for (const json& r : study.at("replicates")) {
        if (r.contains("error")) continue;
        const double inc = r.at("inclusion").at(0).get<double>();
        mae += std::abs(inc - w);
        mean_inc += inc;
        ++ok;
      }
      json row;
      row["m"] = m;
      row["alpha"] = alpha;
      row["partial"] = study.at("aggregate").at("partial");
      if (ok > 0) {
        row["mae_inclusion"] = mae / ok;
        row["mean_inclusion"] = mean_inc / ok;
        row["occupancy"] = study.at("aggregate").at("occupancy");
      }
      row["replicate_summaries"] = study.at("replicates");
      rows.push_back(row);
      ++row_idx;
    }
  }
  out["rows"] = rows;
  return out;
}

void write_report_csv(const json& report, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + path);
  const std::string exp = report.at("experiment").get<std::string>();
  if (exp == "spikeslab") {
    std::fputs("m,alpha,mae_inclusion,mean_inclusion\n", f);
    for (const json& r : report.at("rows")) {
      std::string line = fmt17(r.at("m").get<double>()) + "," +
                         fmt17(r.at("alpha").get<double>()) + "," +
                         fmt17(r.value("mae_inclusion", 0.0)) + "," +
                         fmt17(r.value("mean_inclusion", 0.0)) + "\n";
      std::fputs(line.c_str(), f);
    }
  } else {
    std::fputs(
        "alpha,rmse_mean_x1,rmse_mean_avg,rmse_second_avg,occupancy,"
        "thinning_efficiency\n",
        f);
    for (const json& r : report.at("rows")) {
      std::string line =
          fmt17(r.at("alpha").get<double>()) + "," +
          fmt17(r.contains("rmse_mean") ? r.at("rmse_mean").at(0).get<double>()
                                        : 0.0) +
          "," + fmt17(r.value("rmse_mean_avg", 0.0)) + "," +
          fmt17(r.value("rmse_second_avg", 0.0)) + "," +
          fmt17(r.value("occupancy", 0.0)) + "," +
          fmt17(r.value("thinning_efficiency", 0.0)) + "\n";
      std::fputs(line.c_str(), f);
    }
  }
  std::fclose(f);
}

}  // namespace

json cmd_experiment(const std::string& name, const json& overrides,
                    const std::string& out_dir, int threads) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  json exp = experiment_defaults(name);
  if (!overrides.is_null()) exp.merge_patch(overrides);

  json report;
  if (name == "mixture") report = experiment_mixture(exp, threads);
  else if (name == "spikeslab") report = experiment_spikeslab(exp, threads);
  else if (name == "boltzmann") report = experiment_boltzmann(exp, threads);
  else throw std::invalid_argument("unknown experiment: " + name);

  report["settings"] = exp;
  write_json(report, (fs::path(out_dir) / (name + "_report.json")).string());
  write_report_csv(report, (fs::path(out_dir) / (name + "_report.csv")).string());
  return report;
}

}  // namespace zzct
