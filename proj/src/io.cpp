#include "dpmts/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dpmts/errors.hpp"
#include "dpmts/stationary.hpp"

namespace dpmts {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') quoted = !quoted;
    if (ch == sep && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::optional<double> parse_double(const std::string& text) {
  const std::string s = unquote(text);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path() && !path.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  return in;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// Objects may only carry the listed keys; anything else is almost always a typo.
void check_keys(const json& j, const std::set<std::string>& known, const std::string& where,
                std::vector<std::string>& problems) {
  if (!j.is_object()) {
    problems.push_back(where + " must be an object");
    return;
  }
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) problems.push_back("unknown key '" + k + "' in " + where);
}

template <class T>
void get_if(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

template <class T>
void get_if(const json& j, const char* key, std::optional<T>& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

}  // namespace

// ---- JSON mappings -------------------------------------------------------

#define DPMTS_HYPER_FIELDS(X)                                                                      \
  X(a_m_x) X(b_m_x) X(a_m_y) X(b_m_y) X(a_v_x) X(b_v_x) X(a_v_y) X(b_v_y) X(a_s_x) X(b_s_x)       \
  X(a_s_y) X(b_s_y) X(a_theta) X(b_theta) X(a_c) X(b_c) X(nu_x) X(nu_y) X(a_alpha) X(b_alpha)     \
  X(truncation)

void to_json(json& j, const HyperpriorConfig& c) {
  j = json::object();
#define X(f) j[#f] = c.f;
  DPMTS_HYPER_FIELDS(X)
#undef X
}
void from_json(const json& j, HyperpriorConfig& c) {
#define X(f) get_if(j, #f, c.f);
  DPMTS_HYPER_FIELDS(X)
#undef X
}

void to_json(json& j, const SamplerSettings& s) {
  j = {{"n_iterations", s.n_iterations}, {"burn_in", s.burn_in}, {"thin", s.thin},
       {"rw_scale_mu_x", s.rw_scale_mu_x}, {"rw_scale_log_delta_x", s.rw_scale_log_delta_x},
       {"adapt", s.adapt}, {"seed", s.seed}};
}
void from_json(const json& j, SamplerSettings& s) {
  get_if(j, "n_iterations", s.n_iterations);
  get_if(j, "burn_in", s.burn_in);
  get_if(j, "thin", s.thin);
  get_if(j, "rw_scale_mu_x", s.rw_scale_mu_x);
  get_if(j, "rw_scale_log_delta_x", s.rw_scale_log_delta_x);
  get_if(j, "adapt", s.adapt);
  get_if(j, "seed", s.seed);
}

void to_json(json& j, const PriorShapes& s) { j = {{"a_v", s.a_v}, {"nu", s.nu}, {"a_s", s.a_s}, {"a_c", s.a_c}}; }
void from_json(const json& j, PriorShapes& s) {
  get_if(j, "a_v", s.a_v);
  get_if(j, "nu", s.nu);
  get_if(j, "a_s", s.a_s);
  get_if(j, "a_c", s.a_c);
}

void to_json(json& j, const TarPriors& p) {
  j = {{"phi0_mean", p.phi0_mean}, {"phi0_var", p.phi0_var}, {"phi1_mean", p.phi1_mean},
       {"phi1_var", p.phi1_var},   {"tau_shape", p.tau_shape}, {"tau_scale", p.tau_scale},
       {"r_lo", p.r_lo},           {"r_hi", p.r_hi}};
}
void from_json(const json& j, TarPriors& p) {
  get_if(j, "phi0_mean", p.phi0_mean);
  get_if(j, "phi0_var", p.phi0_var);
  get_if(j, "phi1_mean", p.phi1_mean);
  get_if(j, "phi1_var", p.phi1_var);
  get_if(j, "tau_shape", p.tau_shape);
  get_if(j, "tau_scale", p.tau_scale);
  get_if(j, "r_lo", p.r_lo);
  get_if(j, "r_hi", p.r_hi);
}

void to_json(json& j, const InferenceRequests& r) {
  j = {{"transition_at", r.transition_at}, {"forecast", r.forecast},   {"expectation", r.expectation},
       {"horizon", r.horizon},             {"paths_per_draw", r.paths_per_draw},
       {"grid_points", r.grid_points},     {"level", r.level}};
  j["z_n"] = r.z_n ? json(*r.z_n) : json(nullptr);
  j["grid_lo"] = r.grid_lo ? json(*r.grid_lo) : json(nullptr);
  j["grid_hi"] = r.grid_hi ? json(*r.grid_hi) : json(nullptr);
  j["ppo_t_start"] = r.ppo_t_start ? json(*r.ppo_t_start) : json(nullptr);
}
void from_json(const json& j, InferenceRequests& r) {
  get_if(j, "transition_at", r.transition_at);
  get_if(j, "forecast", r.forecast);
  get_if(j, "z_n", r.z_n);
  get_if(j, "expectation", r.expectation);
  get_if(j, "horizon", r.horizon);
  get_if(j, "paths_per_draw", r.paths_per_draw);
  get_if(j, "grid_points", r.grid_points);
  get_if(j, "grid_lo", r.grid_lo);
  get_if(j, "grid_hi", r.grid_hi);
  get_if(j, "level", r.level);
  get_if(j, "ppo_t_start", r.ppo_t_start);
}

void to_json(json& j, const MixtureState& s) {
  json comps = json::array();
  for (const auto& c : s.components) comps.push_back({c.mu_x, c.mu_y, c.beta, c.delta_x, c.delta_y});
  const auto& p = s.psi;
  j = {{"components", comps},
       {"zeta", s.zeta},
       {"alpha", s.alpha},
       {"psi", {p.m_x, p.v_x, p.m_y, p.v_y, p.s_x, p.s_y, p.theta, p.c, p.nu_x, p.nu_y}}};
}
void from_json(const json& j, MixtureState& s) {
  s.components.clear();
  for (const auto& c : j.at("components")) {
    const auto v = c.get<std::vector<double>>();
    if (v.size() != 5) throw ValidationError("component records need 5 values");
    s.components.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  const auto p = j.at("psi").get<std::vector<double>>();
  if (p.size() != 10) throw ValidationError("psi record needs 10 values");
  s.psi = {p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], p[9]};
  s.alpha = j.at("alpha").get<double>();
  s.set_sticks(j.at("zeta").get<std::vector<double>>());
}

void to_json(json& j, const MoveStats& m) { j = {{"proposed", m.proposed}, {"accepted", m.accepted}}; }
void from_json(const json& j, MoveStats& m) {
  m.proposed = j.at("proposed").get<std::vector<std::uint64_t>>();
  m.accepted = j.at("accepted").get<std::vector<std::uint64_t>>();
}

void to_json(json& j, const TraceRecord& r) {
  j = {r.iteration, r.occupied, r.alpha, r.log_likelihood, r.accept_mu_x, r.accept_log_delta_x,
       r.slice_violations};
}
void from_json(const json& j, TraceRecord& r) {
  r.iteration = j.at(0).get<std::size_t>();
  r.occupied = j.at(1).get<std::size_t>();
  r.alpha = j.at(2).get<double>();
  r.log_likelihood = j.at(3).get<double>();
  r.accept_mu_x = j.at(4).get<double>();
  r.accept_log_delta_x = j.at(5).get<double>();
  r.slice_violations = j.at(6).get<std::uint64_t>();
}

void to_json(json& j, const DrawsMeta& m) {
  j = {{"model", m.model}, {"n", m.n}, {"truncation", m.truncation}, {"seed", m.seed},
       {"series_hash", hex(m.series_hash)}, {"settings", m.settings}};
}
void from_json(const json& j, DrawsMeta& m) {
  m.model = j.at("model").get<std::string>();
  m.n = j.at("n").get<std::size_t>();
  m.truncation = j.at("truncation").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.series_hash = std::stoull(j.at("series_hash").get<std::string>(), nullptr, 16);
  m.settings = j.at("settings").get<SamplerSettings>();
}

// ---- series ---------------------------------------------------------------

std::vector<double> read_series(const fs::path& path, const std::string& column) {
  auto in = open_in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ValidationError(path.string() + ": file is empty");

  const bool csv = lines.front().find(',') != std::string::npos;
  std::size_t field = 0;
  std::size_t first = 0;
  if (csv) {
    const auto header = split(lines.front(), ',');
    std::vector<std::string> names;
    for (const auto& h : header) names.push_back(unquote(h));
    if (column.empty()) {
      if (names.size() != 1) {
        std::string list;
        for (const auto& n : names) list += (list.empty() ? "" : ", ") + ("'" + n + "'");
        throw ValidationError(path.string() + ": several columns (" + list + "); choose one with --column");
      }
    } else {
      const auto it = std::find(names.begin(), names.end(), column);
      if (it == names.end()) throw ValidationError(path.string() + ": no column named '" + column + "'");
      field = static_cast<std::size_t>(it - names.begin());
    }
    first = 1;
  } else {
    if (!column.empty() && trim(lines.front()) != column && unquote(lines.front()) != column)
      throw ValidationError(path.string() + ": no column named '" + column + "'");
    if (!parse_double(lines.front())) first = 1;
  }

  std::vector<double> out;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 1) + ": ";
    std::string cell = lines[i];
    if (csv) {
      const auto fields = split(lines[i], ',');
      if (field >= fields.size()) throw ValidationError(where + "missing field");
      cell = fields[field];
    }
    if (trim(cell).empty()) throw ValidationError(where + "blank value");
    const auto v = parse_double(cell);
    if (!v) throw ValidationError(where + "'" + trim(cell) + "' is not a number");
    if (!std::isfinite(*v)) throw ValidationError(where + "value is not finite");
    out.push_back(*v);
  }
  return out;
}

void write_series(const fs::path& path, const std::vector<double>& series, const std::string& header) {
  auto out = open_out(path);
  if (!header.empty()) out << header << '\n';
  for (double v : series) out << fmt(v) << '\n';
  finish(out, path);
}

// ---- draws ----------------------------------------------------------------

namespace {

void write_meta(std::ostream& out, const DrawsMeta& meta) {
  out << "# dpmts draws\n";
  out << "# model " << meta.model << '\n';
  out << "# n " << meta.n << '\n';
  out << "# truncation " << meta.truncation << '\n';
  out << "# seed " << meta.seed << '\n';
  out << "# series_hash " << hex(meta.series_hash) << '\n';
  out << "# settings " << json(meta.settings).dump() << '\n';
}

}  // namespace

void write_draws(const fs::path& path, const PosteriorDraws& draws) {
  auto out = open_out(path);
  write_meta(out, draws.meta);
  const std::size_t L = draws.meta.truncation;
  out << "iteration alpha m_x v_x m_y v_y s_x s_y theta c nu_x nu_y";
  for (std::size_t l = 1; l <= L; ++l)
    out << " mu_x." << l << " mu_y." << l << " beta." << l << " delta_x." << l << " delta_y." << l;
  for (std::size_t l = 1; l < L; ++l) out << " zeta." << l;
  out << '\n';
  for (std::size_t i = 0; i < draws.draws.size(); ++i) {
    const auto& s = draws.draws[i];
    const auto& p = s.psi;
    out << draws.iterations[i];
    for (double v : {s.alpha, p.m_x, p.v_x, p.m_y, p.v_y, p.s_x, p.s_y, p.theta, p.c, p.nu_x, p.nu_y})
      out << ' ' << fmt(v);
    for (const auto& c : s.components)
      for (double v : {c.mu_x, c.mu_y, c.beta, c.delta_x, c.delta_y}) out << ' ' << fmt(v);
    for (double z : s.zeta) out << ' ' << fmt(z);
    out << '\n';
  }
  finish(out, path);
}

void write_draws(const fs::path& path, const TarFit& fit) {
  auto out = open_out(path);
  write_meta(out, fit.meta);
  out << "# priors " << json(fit.priors).dump() << '\n';
  out << "iteration phi0_1 phi1_1 tau_1 phi0_2 phi1_2 tau_2 r\n";
  for (std::size_t i = 0; i < fit.draws.size(); ++i) {
    const auto& d = fit.draws[i];
    out << fit.iterations[i];
    for (double v : {d.phi0_1, d.phi1_1, d.tau_1, d.phi0_2, d.phi1_2, d.tau_2, d.r}) out << ' ' << fmt(v);
    out << '\n';
  }
  finish(out, path);
}

StoredDraws read_draws(const fs::path& path) {
  auto in = open_in(path);
  std::map<std::string, std::string> meta;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("#", 0) == 0) {
      const std::string body = trim(std::string_view(line).substr(1));
      const auto sp = body.find(' ');
      if (sp != std::string::npos) meta[body.substr(0, sp)] = trim(body.substr(sp + 1));
      continue;
    }
    header = split_ws(line);
    break;
  }
  const std::string where = path.string() + ": ";
  for (const char* key : {"model", "n", "truncation", "seed", "series_hash", "settings"})
    if (!meta.count(key)) throw ValidationError(where + "missing '# " + std::string(key) + "' line; not a draws file");

  StoredDraws out;
  DrawsMeta& m = out.mixture.meta;
  try {
    m.model = meta["model"];
    m.n = std::stoull(meta["n"]);
    m.truncation = std::stoull(meta["truncation"]);
    m.seed = std::stoull(meta["seed"]);
    m.series_hash = std::stoull(meta["series_hash"], nullptr, 16);
    m.settings = json::parse(meta["settings"]).get<SamplerSettings>();
  } catch (const std::exception& e) {
    throw ValidationError(where + "malformed metadata: " + e.what());
  }
  const bool tar = m.model == "tar";
  if (!tar && m.model != "general" && m.model != "stationary")
    throw ValidationError(where + "unknown model '" + m.model + "'");
  const std::size_t L = m.truncation;
  const std::size_t expected = tar ? 8 : 12 + 5 * L + (L > 0 ? L - 1 : 0);
  if (header.size() != expected)
    throw ValidationError(where + "expected " + std::to_string(expected) + " columns, header has " +
                          std::to_string(header.size()));
  if (tar) {
    out.tar.meta = m;
    if (!meta.count("priors")) throw ValidationError(where + "TAR draws need a '# priors' line");
    out.tar.priors = json::parse(meta["priors"]).get<TarPriors>();
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto tok = split_ws(line);
    const std::string at = path.string() + ":" + std::to_string(lineno) + ": ";
    if (tok.size() != expected) throw ValidationError(at + "wrong number of fields");
    std::vector<double> v(expected);
    for (std::size_t k = 0; k < expected; ++k) {
      const auto d = parse_double(tok[k]);
      if (!d) throw ValidationError(at + "'" + tok[k] + "' is not a number");
      v[k] = *d;
    }
    const auto iteration = static_cast<std::size_t>(v[0]);
    if (tar) {
      out.tar.iterations.push_back(iteration);
      out.tar.draws.push_back({v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
      continue;
    }
    MixtureState s;
    s.alpha = v[1];
    s.psi = {v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11]};
    for (std::size_t l = 0; l < L; ++l) {
      const double* c = &v[12 + 5 * l];
      s.components.push_back({c[0], c[1], c[2], c[3], c[4]});
    }
    try {
      s.set_sticks(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(12 + 5 * L), v.end()));
      s.validate();
    } catch (const DomainError& e) {
      throw ValidationError(at + e.what());
    }
    out.mixture.iterations.push_back(iteration);
    out.mixture.draws.push_back(std::move(s));
  }
  if (out.size() == 0) throw ValidationError(where + "no draws");
  return out;
}

std::size_t StoredDraws::size() const {
  return model() == "tar" ? tar.draws.size() : mixture.draws.size();
}

std::unique_ptr<TransitionDraws> StoredDraws::view() const {
  if (model() == "tar") return std::make_unique<TarDraws>(tar.draws);
  return std::make_unique<MixtureDraws>(mixture.draws);
}

// ---- summaries ------------------------------------------------------------

void write_grid(const fs::path& path, const DensityGrid& grid, const std::string& comment) {
  auto out = open_out(path);
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "# level " << fmt(grid.level) << '\n';
  out << "z mean lower upper\n";
  for (std::size_t i = 0; i < grid.z.size(); ++i)
    out << fmt(grid.z[i]) << ' ' << fmt(grid.mean[i]) << ' ' << fmt(grid.lower[i]) << ' ' << fmt(grid.upper[i])
        << '\n';
  finish(out, path);
}

void write_ppo(const fs::path& path, const PpoResult& r, const std::string& comment) {
  auto out = open_out(path);
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "# t_start " << r.t_start << '\n';
  out << "# log_sum " << fmt(r.log_sum) << '\n';
  out << "t log_ordinate ess finite\n";
  for (std::size_t i = 0; i < r.t.size(); ++i)
    out << r.t[i] << ' ' << fmt(r.log_ordinate[i]) << ' ' << fmt(r.ess[i]) << ' ' << (r.finite[i] ? 1 : 0)
        << '\n';
  finish(out, path);
}

void write_paths(const fs::path& path, const Matrix& paths) {
  auto out = open_out(path);
  for (std::size_t k = 0; k < paths.cols; ++k) out << (k ? " " : "") << "h" << k + 1;
  out << '\n';
  for (std::size_t i = 0; i < paths.rows; ++i) {
    for (std::size_t k = 0; k < paths.cols; ++k) out << (k ? " " : "") << fmt(paths(i, k));
    out << '\n';
  }
  finish(out, path);
}

void write_trace(const fs::path& path, const std::vector<TraceRecord>& trace) {
  auto out = open_out(path);
  out << "iteration occupied alpha log_likelihood accept_mu_x accept_log_delta_x slice_violations\n";
  for (const auto& r : trace)
    out << r.iteration << ' ' << r.occupied << ' ' << fmt(r.alpha) << ' ' << fmt(r.log_likelihood) << ' '
        << fmt(r.accept_mu_x) << ' ' << fmt(r.accept_log_delta_x) << ' ' << r.slice_violations << '\n';
  finish(out, path);
}

// ---- checkpoints ----------------------------------------------------------

void write_checkpoint(const fs::path& path, const Checkpoint& cp) {
  json j;
  j["format"] = "dpmts-checkpoint";
  j["version"] = 1;
  j["model"] = cp.model;
  j["series"] = cp.series;
  j["config"] = cp.config;
  j["settings"] = cp.settings;
  j["chain"] = {{"mixture", cp.chain.mixture},
                {"labels", cp.chain.labels},
                {"iteration", cp.chain.iteration},
                {"rng", cp.chain.rng.serialize()}};
  j["scale_mu_x"] = cp.scale_mu_x;
  j["scale_log_delta_x"] = cp.scale_log_delta_x;
  j["scale_beta"] = cp.scale_beta;
  j["moves_mu_x"] = cp.moves_mu_x;
  j["moves_delta_x"] = cp.moves_delta_x;
  j["moves_beta"] = cp.moves_beta;
  j["window_mu_x"] = cp.window_mu_x;
  j["window_delta_x"] = cp.window_delta_x;
  j["max_occupied"] = cp.max_occupied;
  j["slice"] = {cp.slice.updates, cp.slice.checks, cp.slice.violations};
  j["draws"] = {{"meta", cp.draws.meta}, {"iterations", cp.draws.iterations}, {"states", cp.draws.draws}};
  j["trace"] = cp.trace;
  auto out = open_out(path);
  out << j.dump() << '\n';
  finish(out, path);
}

Checkpoint read_checkpoint(const fs::path& path) {
  auto in = open_in(path);
  Checkpoint cp;
  try {
    const json j = json::parse(in);
    if (j.value("format", "") != "dpmts-checkpoint") throw ValidationError("not a checkpoint file");
    if (j.at("version").get<int>() != 1) throw ValidationError("unsupported checkpoint version");
    cp.model = j.at("model").get<std::string>();
    cp.series = j.at("series").get<std::vector<double>>();
    cp.config = j.at("config").get<HyperpriorConfig>();
    cp.settings = j.at("settings").get<SamplerSettings>();
    const auto& ch = j.at("chain");
    cp.chain.mixture = ch.at("mixture").get<MixtureState>();
    cp.chain.labels = ch.at("labels").get<std::vector<int>>();
    cp.chain.iteration = ch.at("iteration").get<std::size_t>();
    cp.chain.rng = Rng::deserialize(ch.at("rng").get<std::string>());
    cp.scale_mu_x = j.at("scale_mu_x").get<std::vector<double>>();
    cp.scale_log_delta_x = j.at("scale_log_delta_x").get<std::vector<double>>();
    cp.scale_beta = j.at("scale_beta").get<std::vector<double>>();
    cp.moves_mu_x = j.at("moves_mu_x").get<MoveStats>();
    cp.moves_delta_x = j.at("moves_delta_x").get<MoveStats>();
    cp.moves_beta = j.at("moves_beta").get<MoveStats>();
    cp.window_mu_x = j.at("window_mu_x").get<MoveStats>();
    cp.window_delta_x = j.at("window_delta_x").get<MoveStats>();
    cp.max_occupied = j.at("max_occupied").get<std::size_t>();
    const auto sl = j.at("slice").get<std::vector<std::uint64_t>>();
    cp.slice = {sl.at(0), sl.at(1), sl.at(2)};
    const auto& d = j.at("draws");
    cp.draws.meta = d.at("meta").get<DrawsMeta>();
    cp.draws.iterations = d.at("iterations").get<std::vector<std::size_t>>();
    cp.draws.draws = d.at("states").get<std::vector<MixtureState>>();
    cp.trace = j.at("trace").get<std::vector<TraceRecord>>();
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": malformed checkpoint: " + e.what());
  } catch (const DomainError& e) {
    throw ValidationError(path.string() + ": invalid checkpoint state: " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return cp;
}

// ---- run configuration ----------------------------------------------------

void RunConfig::validate() const {
  std::vector<std::string> problems;
  if (model != "general" && model != "stationary" && model != "tar")
    problems.push_back("model must be one of general, stationary, tar (got '" + model + "')");
  if (data.empty())
    problems.push_back("no data file given");
  else if (!fs::exists(data))
    problems.push_back("data file '" + data + "' does not exist");
  if (range && !(*range > 0.0)) problems.push_back("range must be positive");
  if (truncation < 1) problems.push_back("truncation must be at least 1");
  if (chains < 1) problems.push_back("chains must be at least 1");
  if (model == "tar" && priors) problems.push_back("mixture priors given for the tar model");
  if (model != "tar" && tar_priors) problems.push_back("tar_priors given for a mixture model");
  if (priors && priors->truncation != truncation)
    problems.push_back("priors.truncation disagrees with truncation");
  for (double s : {shapes.a_v, shapes.nu, shapes.a_s, shapes.a_c})
    if (!(s > 1.0)) {
      problems.push_back("prior shapes must exceed 1");
      break;
    }
  try {
    settings.validate();
  } catch (const std::exception& e) {
    problems.push_back(e.what());
  }
  if (priors) try {
      priors->validate();
    } catch (const std::exception& e) {
      problems.push_back(std::string("priors: ") + e.what());
    }
  if (tar_priors) try {
      tar_priors->validate();
    } catch (const std::exception& e) {
      problems.push_back(std::string("tar_priors: ") + e.what());
    }
  if (!(requests.level > 0.0 && requests.level < 1.0)) problems.push_back("level must lie in (0, 1)");
  if (requests.grid_points < 2) problems.push_back("grid_points must be at least 2");
  if (requests.horizon > 0 && requests.paths_per_draw < 1) problems.push_back("paths_per_draw must be at least 1");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
}

std::string to_json_text(const RunConfig& c) {
  json j;
  j["model"] = c.model;
  j["data"] = c.data;
  j["column"] = c.column;
  j["center"] = c.center ? json(*c.center) : json(nullptr);
  j["range"] = c.range ? json(*c.range) : json(nullptr);
  j["shapes"] = c.shapes;
  j["priors"] = c.priors ? json(*c.priors) : json(nullptr);
  j["truncation"] = c.truncation;
  j["tar_priors"] = c.tar_priors ? json(*c.tar_priors) : json(nullptr);
  j["settings"] = c.settings;
  j["requests"] = c.requests;
  j["output_dir"] = c.output_dir;
  j["chains"] = c.chains;
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<std::string> problems;
  check_keys(j,
             {"model", "data", "column", "center", "range", "shapes", "priors", "truncation", "tar_priors",
              "settings", "requests", "output_dir", "chains"},
             "config", problems);
  if (j.contains("shapes")) check_keys(j["shapes"], {"a_v", "nu", "a_s", "a_c"}, "shapes", problems);
  if (j.contains("settings"))
    check_keys(j["settings"],
               {"n_iterations", "burn_in", "thin", "rw_scale_mu_x", "rw_scale_log_delta_x", "adapt", "seed"},
               "settings", problems);
  if (j.contains("priors") && !j["priors"].is_null()) {
    std::set<std::string> known;
#define X(f) known.insert(#f);
    DPMTS_HYPER_FIELDS(X)
#undef X
    check_keys(j["priors"], known, "priors", problems);
  }
  if (j.contains("tar_priors") && !j["tar_priors"].is_null())
    check_keys(j["tar_priors"],
               {"phi0_mean", "phi0_var", "phi1_mean", "phi1_var", "tau_shape", "tau_scale", "r_lo", "r_hi"},
               "tar_priors", problems);
  if (j.contains("requests"))
    check_keys(j["requests"],
               {"transition_at", "forecast", "z_n", "expectation", "horizon", "paths_per_draw", "grid_points",
                "grid_lo", "grid_hi", "level", "ppo_t_start"},
               "requests", problems);
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
  RunConfig c;
  try {
    get_if(j, "model", c.model);
    get_if(j, "data", c.data);
    get_if(j, "column", c.column);
    get_if(j, "center", c.center);
    get_if(j, "range", c.range);
    get_if(j, "shapes", c.shapes);
    get_if(j, "truncation", c.truncation);
    if (j.contains("priors") && !j["priors"].is_null()) {
      HyperpriorConfig h;
      h.truncation = c.truncation;
      from_json(j["priors"], h);
      c.priors = h;
    }
    get_if(j, "tar_priors", c.tar_priors);
    get_if(j, "settings", c.settings);
    get_if(j, "requests", c.requests);
    get_if(j, "output_dir", c.output_dir);
    get_if(j, "chains", c.chains);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config has a value of the wrong type: ") + e.what());
  }
  return c;
}

RunConfig read_run_config(const fs::path& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_json_text(ss.str());
}

void write_run_config(const fs::path& path, const RunConfig& config) {
  auto out = open_out(path);
  out << to_json_text(config);
  finish(out, path);
}

std::string to_json_text(const HyperpriorConfig& config) { return json(config).dump(); }
std::string to_json_text(const SamplerSettings& settings) { return json(settings).dump(); }

}  // namespace dpmts
