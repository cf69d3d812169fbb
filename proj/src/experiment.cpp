#include "wde/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "wde/densities.hpp"
#include "wde/error.hpp"
#include "wde/normal.hpp"

namespace wde {

namespace fs = std::filesystem;

namespace {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

std::string mode_name(const ExperimentConfig& c) { return c.iid ? "iid" : "mcmc"; }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::InvalidArgument, "cannot create directory " + dir + ": " + ec.message());
}

[[noreturn]] void parse_error(const std::string& path, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::Parse, path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) parse_error(path, line, "not a finite number: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    parse_error(path, line, "not a number: '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) parse_error(path, line, "not an integer: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    parse_error(path, line, "not an integer: '" + s + "'");
  }
}

struct Criterion {
  double raw = 0.0;
  double normalized = 0.0;
  double mass = 0.0;
};

Criterion criterion(const DensityEstimate& est, const Sample& validation, int smooth_cells) {
  Criterion c;
  c.raw = ver_hat_from(est.coeffs.sum_of_squares(), est, validation);
  const QuadratureGrid grid = estimate_grid(est, default_target_box(), default_cells_per_unit(est, smooth_cells));
  const Normalized n = normalize(est, grid);
  double sq = 0.0;
  for (double v : n.values) sq += v * v;
  c.normalized = ver_hat_from(sq * grid.weight(), n.estimate, validation);
  c.mass = n.mass;
  return c;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
  static const char* known[] = {"sizes", "reps", "wavelets", "wavelet", "j0", "j1", "multiples", "eta", "rho12",
                                "rho34", "seed", "iid", "out", "iterations", "workers", "scope",
                                "train_fraction", "smooth_cells", "cascade_depth", "holder_r", "p_loss"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
        std::end(known)) {
      throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
  }
  ExperimentConfig c;
  try {
    read_opt(j, "sizes", c.sizes);
    read_opt(j, "reps", c.reps);
    read_opt(j, "wavelets", c.wavelets);
    if (j.contains("wavelet")) {
      const auto w = j.at("wavelet").get<std::string>();
      c.wavelets = w == "both" ? std::vector<std::string>{"haar", "d4"} : std::vector<std::string>{w};
    }
    read_opt(j, "j0", c.j_lo);
    read_opt(j, "j1", c.j_hi);
    read_opt(j, "multiples", c.multiples);
    if (j.contains("eta")) {
      const auto e = j.at("eta").get<std::vector<double>>();
      if (e.size() != kFieldComponents) throw Error(ErrorCode::InvalidArgument, "eta needs five values");
      std::copy(e.begin(), e.end(), c.eta.begin());
    }
    read_opt(j, "rho12", c.rho12);
    read_opt(j, "rho34", c.rho34);
    read_opt(j, "seed", c.seed);
    read_opt(j, "iid", c.iid);
    read_opt(j, "out", c.out);
    read_opt(j, "iterations", c.iterations);
    read_opt(j, "workers", c.workers);
    read_opt(j, "scope", c.scope);
    read_opt(j, "train_fraction", c.train_fraction);
    read_opt(j, "smooth_cells", c.smooth_cells);
    read_opt(j, "cascade_depth", c.cascade_depth);
    read_opt(j, "holder_r", c.holder_r);
    read_opt(j, "p_loss", c.p_loss);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad config value: ") + e.what());
  }
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"sizes", sizes},
          {"reps", reps},
          {"wavelets", wavelets},
          {"j0", j_lo},
          {"j1", j_hi},
          {"multiples", multiples},
          {"eta", std::vector<double>(eta.begin(), eta.end())},
          {"rho12", rho12},
          {"rho34", rho34},
          {"seed", seed},
          {"iid", iid},
          {"out", out},
          {"iterations", iterations},
          {"workers", workers},
          {"scope", scope},
          {"train_fraction", train_fraction},
          {"smooth_cells", smooth_cells},
          {"cascade_depth", cascade_depth},
          {"holder_r", holder_r},
          {"p_loss", p_loss}};
}

ThresholdScope ExperimentConfig::threshold_scope() const {
  return scope == "global" ? ThresholdScope::Global : ThresholdScope::PerLevel;
}

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (sizes.empty()) bad("need at least one lattice size");
  for (int s : sizes) {
    if (s < 2) bad("lattice sizes must be at least 2");
  }
  if (reps < 1) bad("replications must be at least 1");
  if (wavelets.empty()) bad("need at least one wavelet");
  for (const auto& w : wavelets) {
    if (w != "haar" && w != "d4") bad("unknown wavelet '" + w + "' (expected haar, d4 or both)");
  }
  if (j_lo < 0 || j_hi < j_lo || j_hi > 12) bad("levels need 0 <= j0 <= j1 <= 12");
  for (double m : multiples) {
    if (!(m >= 0.0)) bad("threshold multiples must be nonnegative");
  }
  if (std::abs(rho12) >= 1.0 || std::abs(rho34) >= 1.0) bad("copula correlations must lie in (-1, 1)");
  if (iterations < 0) bad("iterations must be nonnegative");
  if (workers < 1) bad("workers must be at least 1");
  if (scope != "level" && scope != "global") bad("scope must be level or global");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) bad("train fraction must lie in (0, 1)");
  if (smooth_cells < 1 || cascade_depth < 1 || cascade_depth > 20) bad("bad quadrature or cascade resolution");
  if (!(holder_r > 0.0 && holder_r <= 1.0)) bad("holder_r must lie in (0, 1]");
  if (!(p_loss >= 1.0)) bad("p_loss must be at least 1");
  for (int s : sizes) {
    const EtaRange range = admissible_eta_range(square_lattice(s));
    for (double e : eta) {
      if (e != 0.0 && !range.contains(e)) {
        std::ostringstream os;
        os << "eta = " << e << " is outside the admissible interval (" << range.lo << ", " << range.hi
           << ") for a " << s << "x" << s << " lattice";
        throw Error(ErrorCode::NonInvertible, os.str());
      }
    }
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open config " + path);
  try {
    return ExperimentConfig::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

std::uint64_t replication_seed(std::uint64_t seed, int side, int rep) {
  return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(side)), static_cast<std::uint64_t>(rep));
}

MultiField simulate_fields(const ExperimentConfig& config, int side, int rep) {
  const LatticeShape shape = square_lattice(side);
  const Eigen::MatrixXd copula = default_copula_correlation(config.rho12, config.rho34);
  Rng rng(replication_seed(config.seed, side, rep));
  if (config.iid) return sample_independent(shape, copula, rng);
  MultiField field = make_multifield(shape, config.eta, copula, rng);
  return run_chain(std::move(field), config.iterations, rng);
}

Sample simulate_sample(const ExperimentConfig& config, int side, int rep) {
  return transform_to_target(simulate_fields(config, side, rep));
}

void write_sample_csv(const std::string& path, const LatticeShape& shape, const Sample& sample) {
  if (shape.rank() != 2 || sample.dim() != 2 || sample.size() != shape.cardinality()) {
    throw Error(ErrorCode::InvalidArgument, "sample does not match a two-dimensional lattice");
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  out << "site_row,site_col,y1,y2\n" << std::setprecision(17);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Site s = shape.site_at(i);
    const auto p = sample.point(i);
    out << s.coords[0] << ',' << s.coords[1] << ',' << p[0] << ',' << p[1] << '\n';
  }
}

LatticeSample read_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open sample " + path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) parse_error(path, lineno, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "site_row,site_col,y1,y2") parse_error(path, lineno, "expected header site_row,site_col,y1,y2");
  struct Row {
    int r, c;
    double y1, y2;
  };
  std::vector<Row> rows;
  int max_r = 0, max_c = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) parse_error(path, lineno, "expected 4 columns, found " + std::to_string(cells.size()));
    Row row{parse_int(cells[0], path, lineno), parse_int(cells[1], path, lineno),
            parse_double(cells[2], path, lineno), parse_double(cells[3], path, lineno)};
    if (row.r < 1 || row.c < 1) parse_error(path, lineno, "site coordinates must be positive");
    max_r = std::max(max_r, row.r);
    max_c = std::max(max_c, row.c);
    rows.push_back(row);
  }
  if (rows.empty()) parse_error(path, lineno, "no data rows");
  LatticeShape shape({max_r, max_c});
  if (rows.size() != shape.cardinality()) {
    parse_error(path, lineno, "expected one row per site of a " + std::to_string(max_r) + "x" +
                                  std::to_string(max_c) + " lattice, found " + std::to_string(rows.size()));
  }
  std::vector<double> coords(2 * rows.size());
  std::vector<bool> seen(rows.size(), false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t at = shape.linear_index(Site{{rows[i].r, rows[i].c}});
    if (seen[at]) parse_error(path, i + 2, "duplicate site");
    seen[at] = true;
    coords[2 * at] = rows[i].y1;
    coords[2 * at + 1] = rows[i].y2;
  }
  return LatticeSample{shape, Sample(2, std::move(coords))};
}

std::pair<Sample, Sample> split_sample(const LatticeShape& shape, const Sample& sample, double fraction) {
  const TrainValidateSplit split = partition_train_validate(shape, fraction);
  std::vector<std::size_t> train, validate;
  for (const Site& s : split.train) train.push_back(shape.linear_index(s));
  for (const Site& s : split.validate) validate.push_back(shape.linear_index(s));
  std::sort(train.begin(), train.end());
  std::sort(validate.begin(), validate.end());
  return {sample.subset(train), sample.subset(validate)};
}

std::vector<RepRecord> evaluate_replication(const ExperimentConfig& config, const Sample& train,
                                            const Sample& validation, std::size_t sample_size, int rep) {
  std::vector<RepRecord> out;
  for (const auto& name : config.wavelets) {
    const WaveletBasis basis = basis_by_name(name, 2, config.cascade_depth);
    const CoefficientSet full = compute_coefficients(train, basis, config.j_lo, config.j_hi);
    auto record = [&](const DensityEstimate& est, const char* estimator, int j, double threshold) {
      const Criterion c = criterion(est, validation, config.smooth_cells);
      out.push_back(RepRecord{sample_size, rep, name, estimator, j, threshold, c.raw, c.normalized, c.mass});
    };
    for (int j = config.j_lo; j <= config.j_hi; ++j) {
      if (j == config.j_lo) {
        CoefficientSet coarse;
        coarse.dim = full.dim;
        coarse.coarse_level = j;
        coarse.father = full.father;
        record(DensityEstimate{basis, EstimateKind::Linear, j, j, {}, 0.0, std::move(coarse), std::nullopt},
               "linear", j, 0.0);
      } else {
        record(linear_estimate(train, basis, j), "linear", j, 0.0);
      }
    }
    for (int j1 = config.j_lo + 1; j1 <= config.j_hi; ++j1) {
      for (double mult : config.multiples) {
        const auto thresholds = relative_thresholds(full, mult, config.j_lo, j1, config.threshold_scope());
        record(hard_threshold_estimate(full, basis, j1, thresholds), "hard", j1, mult);
      }
    }
  }
  return out;
}

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<VerReport> aggregate(const std::vector<RepRecord>& records) {
  using Key = std::tuple<std::size_t, int, int, double>;  // size, hard?, j, threshold
  std::map<std::string, std::map<Key, std::pair<std::vector<double>, std::vector<double>>>> groups;
  for (const auto& r : records) {
    auto& cell = groups[r.wavelet][Key{r.sample_size, r.estimator == "hard" ? 1 : 0, r.j, r.threshold}];
    cell.first.push_back(r.raw);
    cell.second.push_back(r.normalized);
  }
  std::vector<VerReport> out;
  for (const auto& [wavelet, cells] : groups) {
    VerReport raw{wavelet, "raw", {}};
    VerReport norm{wavelet, "normalized", {}};
    for (const auto& [key, values] : cells) {
      const auto& [size, hard, j, threshold] = key;
      const std::string estimator = hard ? "hard" : "linear";
      raw.add(size, j, estimator, threshold, values.first);
      norm.add(size, j, estimator, threshold, values.second);
    }
    raw.mark_minima();
    norm.mark_minima();
    out.push_back(std::move(raw));
    out.push_back(std::move(norm));
  }
  return out;
}

TableResult run_table(const ExperimentConfig& config, bool write) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  TableResult result;
  const std::string reps_dir = config.out + "/reps";
  if (write) ensure_dir(reps_dir);
  for (int side : config.sizes) {
    const LatticeShape shape = square_lattice(side);
    std::vector<std::vector<RepRecord>> slots(static_cast<std::size_t>(config.reps));
    parallel_for(config.reps, config.workers, [&](int rep) {
      const Sample sample = simulate_sample(config, side, rep);
      const auto [train, validation] = split_sample(shape, sample, config.train_fraction);
      slots[static_cast<std::size_t>(rep)] = evaluate_replication(config, train, validation, shape.cardinality(), rep);
    });
    for (int rep = 0; rep < config.reps; ++rep) {
      auto& recs = slots[static_cast<std::size_t>(rep)];
      if (write) {
        std::ostringstream name;
        name << reps_dir << '/' << mode_name(config) << "_n" << shape.cardinality() << "_rep" << std::setw(4)
             << std::setfill('0') << rep << ".csv";
        std::ofstream out(name.str());
        out << "sample_size,rep,wavelet,estimator,j,threshold,raw,normalized,mass\n";
        for (const auto& r : recs) {
          out << r.sample_size << ',' << r.rep << ',' << r.wavelet << ',' << r.estimator << ',' << r.j << ','
              << format_double(r.threshold) << ',' << format_double(r.raw) << ',' << format_double(r.normalized)
              << ',' << format_double(r.mass) << '\n';
        }
      }
      result.records.insert(result.records.end(), recs.begin(), recs.end());
    }
  }
  result.reports = aggregate(result.records);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (write) {
    for (const auto& rep : result.reports) {
      rep.write_csv(config.out + "/table_" + mode_name(config) + "_" + rep.wavelet + "_" + rep.variant + ".csv");
    }
    nlohmann::json run{{"config", config.to_json()},
                       {"mode", mode_name(config)},
                       {"replications", config.reps},
                       {"records", result.records.size()},
                       {"threshold_scope", config.scope}};
    std::ofstream(config.out + "/run_" + mode_name(config) + ".json") << run.dump(2) << '\n';
  }
  return result;
}

std::vector<RepRecord> read_rep_records(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RepRecord> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    std::size_t lineno = 1;
    std::getline(in, line);
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto c = split_csv(line);
      if (c.size() != 9) parse_error(f.string(), lineno, "expected 9 columns");
      const std::string p = f.string();
      out.push_back(RepRecord{static_cast<std::size_t>(parse_int(c[0], p, lineno)), parse_int(c[1], p, lineno), c[2],
                              c[3], parse_int(c[4], p, lineno), parse_double(c[5], p, lineno),
                              parse_double(c[6], p, lineno), parse_double(c[7], p, lineno),
                              parse_double(c[8], p, lineno)});
    }
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "need two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

RateResult run_rates(const ExperimentConfig& config, bool write) {
  config.validate();
  const WaveletBasis haar = tensor_basis(haar_filters(), 2);
  const DilationMatrix m = DilationMatrix::isotropic(2);
  RateResult result;
  result.s_eff = holder_embedding_s(config.holder_r, 2, m);
  result.predicted_slope = -2.0 * result.s_eff / (2.0 * result.s_eff + 1.0);
  const Box unit{{0.0, 0.0}, {1.0, 1.0}};
  const DensityFn truth = [](std::span<const double> x) { return ramp_pdf(x); };

  for (int side : config.sizes) {
    const std::size_t n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
    RatePoint pt;
    pt.sample_size = n;
    pt.linear_level = linear_level(result.s_eff, n, m.abs_det());
    const RateParams rp = rate_params(BesovParams{result.s_eff, kInf, kInf, 1.0}, config.p_loss, n, m);
    pt.j0 = rp.j0;
    pt.j1 = rp.j1;
    std::vector<double> lin(static_cast<std::size_t>(config.reps)), hard(static_cast<std::size_t>(config.reps));
    parallel_for(config.reps, config.workers, [&](int rep) {
      const Sample sample = transform_to_ramp(simulate_fields(config, side, rep));
      const DensityEstimate l = linear_estimate(sample, haar, pt.linear_level);
      lin[static_cast<std::size_t>(rep)] = ise(l, truth, estimate_grid(l, unit, config.smooth_cells));
      const DensityEstimate h = hard_threshold_estimate(sample, haar, rp.j0, rp.j1, rp.lambda_bar);
      hard[static_cast<std::size_t>(rep)] = ise(h, truth, estimate_grid(h, unit, config.smooth_cells));
    });
    const auto [lm, ls] = mean_std(lin);
    const auto [hm, hs] = mean_std(hard);
    const double root = std::sqrt(static_cast<double>(config.reps));
    pt.linear_mean = lm;
    pt.linear_se = ls / root;
    pt.hard_mean = hm;
    pt.hard_se = hs / root;
    result.points.push_back(pt);
  }
  std::vector<double> ns, lm, hm;
  for (const auto& p : result.points) {
    ns.push_back(static_cast<double>(p.sample_size));
    lm.push_back(p.linear_mean);
    hm.push_back(p.hard_mean);
  }
  if (ns.size() >= 2) {
    result.linear_slope = loglog_slope(ns, lm);
    result.hard_slope = loglog_slope(ns, hm);
  }
  if (write) {
    ensure_dir(config.out);
    std::ofstream out(config.out + "/rates_" + mode_name(config) + ".csv");
    out << "sample_size,linear_level,linear_mean_ise,linear_se,j0,j1,hard_mean_ise,hard_se\n"
        << std::setprecision(10);
    for (const auto& p : result.points) {
      out << p.sample_size << ',' << p.linear_level << ',' << p.linear_mean << ',' << p.linear_se << ',' << p.j0
          << ',' << p.j1 << ',' << p.hard_mean << ',' << p.hard_se << '\n';
    }
    nlohmann::json summary{{"config", config.to_json()},
                           {"density", "2*x1 on [0,1]^2"},
                           {"s_eff", result.s_eff},
                           {"predicted_slope", result.predicted_slope},
                           {"linear_slope", result.linear_slope},
                           {"hard_slope", result.hard_slope}};
    std::ofstream(config.out + "/rates_" + mode_name(config) + ".json") << summary.dump(2) << '\n';
  }
  return result;
}

}  // namespace wde
