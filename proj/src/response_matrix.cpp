#include "binflux/response_matrix.hpp"

#include "binflux/errors.hpp"
#include "binflux/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace binflux {

using nlohmann::json;

namespace {

constexpr const char *kCsvMagic = "# binflux-matrix v1";

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep))
    out.push_back(field);
  if (!s.empty() && s.back() == sep)
    out.emplace_back();
  return out;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T> T parse_number(const std::string &text, const std::string &field, int line) {
  const std::string t = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ParseError(field + ": cannot parse '" + t + "' as a number", line);
  return value;
}

BuildMethod parse_method(const std::string &text, std::vector<int> &support, int line) {
  std::string base = text;
  support.clear();
  if (const auto plus = text.find("+interp:"); plus != std::string::npos) {
    base = text.substr(0, plus);
    for (const auto &tok : split(text.substr(plus + 8), ':'))
      support.push_back(parse_number<int>(tok, "method support point", line));
  }
  if (base == "exact")
    return ExactMethod{};
  if (base.rfind("mc:", 0) == 0) {
    MonteCarloMethod mc;
    bool have_shots = false, have_seed = false;
    for (const auto &tok : split(base.substr(3), ':')) {
      if (tok.rfind("shots=", 0) == 0) {
        mc.shots = parse_number<std::uint64_t>(tok.substr(6), "method shots", line);
        have_shots = true;
      } else if (tok.rfind("seed=", 0) == 0) {
        mc.seed = parse_number<std::uint64_t>(tok.substr(5), "method seed", line);
        have_seed = true;
      } else {
        throw ParseError("method: unknown Monte Carlo parameter '" + tok + "'", line);
      }
    }
    if (!have_shots || !have_seed)
      throw ParseError("method: Monte Carlo method needs shots= and seed=", line);
    return mc;
  }
  throw ParseError("method: unknown method '" + text + "'", line);
}

RowProvenance computed_provenance(const BuildMethod &method) {
  RowProvenance p;
  if (const auto *mc = std::get_if<MonteCarloMethod>(&method)) {
    p.kind = RowProvenance::Kind::MonteCarlo;
    p.shots = mc->shots;
    p.seed = mc->seed;
  }
  return p;
}

// Fills provenance from method + support, as done by build and load alike.
void assign_provenance(ResponseMatrix &m) {
  m.provenance.assign(std::size_t(m.mu_max) + 1, computed_provenance(m.method));
  if (m.support.empty())
    return;
  for (std::size_t i = 0; i + 1 < m.support.size(); ++i)
    for (int mu = m.support[i] + 1; mu < m.support[i + 1]; ++mu) {
      auto &p = m.provenance[std::size_t(mu)];
      p = RowProvenance{};
      p.kind = RowProvenance::Kind::Interpolated;
      p.mu_lo = m.support[i];
      p.mu_hi = m.support[i + 1];
    }
}

ClickDistribution compute_row(const SystemConfig &config, const BinWeights &weights, int mu,
                              const BuildMethod &method) {
  if (const auto *mc = std::get_if<MonteCarloMethod>(&method)) {
    const auto batch = simulate_batch(Coherent{double(mu)}, weights, config.detector, mc->shots,
                                      derive_key(mc->seed, std::uint64_t(mu)));
    return ClickDistribution{batch.probabilities(), Coherent{double(mu)}};
  }
  return coherent_click_distribution(double(mu), weights, config.detector);
}

std::vector<int> normalized_support(std::vector<int> support, int mu_max) {
  for (int mu : support)
    if (mu < 0 || mu > mu_max)
      throw InputError("build_matrix: support point " + std::to_string(mu) +
                       " outside [0, mu_max=" + std::to_string(mu_max) + "]");
  support.push_back(0);
  support.push_back(mu_max);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  return support;
}

} // namespace

std::vector<double> ResponseMatrix::column(std::size_t n) const {
  std::vector<double> col(rows.size());
  for (std::size_t mu = 0; mu < rows.size(); ++mu)
    col[mu] = rows[mu].probs.at(n);
  return col;
}

std::string ResponseMatrix::method_string() const {
  std::string s = "exact";
  if (const auto *mc = std::get_if<MonteCarloMethod>(&method))
    s = "mc:shots=" + std::to_string(mc->shots) + ":seed=" + std::to_string(mc->seed);
  if (!support.empty()) {
    s += "+interp";
    for (int mu : support)
      s += ":" + std::to_string(mu);
  }
  return s;
}

ResponseMatrix build_matrix(const SystemConfig &config, int mu_max, const BuildMethod &method,
                            const std::vector<int> &support) {
  if (mu_max < 1)
    throw InputError("build_matrix: mu_max must be >= 1");
  validate(config);
  if (const auto *mc = std::get_if<MonteCarloMethod>(&method); mc && mc->shots < 1)
    throw InputError("build_matrix: Monte Carlo shots must be >= 1");

  const BinWeights weights = config.weights();
  ResponseMatrix m;
  m.mu_max = mu_max;
  m.bins = weights.bins();
  m.fingerprint = fingerprint(config);
  m.method = method;
  m.rows.resize(std::size_t(mu_max) + 1);

  if (support.empty()) {
    for (int mu = 0; mu <= mu_max; ++mu)
      m.rows[std::size_t(mu)] = compute_row(config, weights, mu, method);
    assign_provenance(m);
    return m;
  }

  m.support = normalized_support(support, mu_max);
  for (int mu : m.support)
    m.rows[std::size_t(mu)] = compute_row(config, weights, mu, method);
  assign_provenance(m);
  for (int mu = 0; mu <= mu_max; ++mu)
    if (m.provenance[std::size_t(mu)].kind == RowProvenance::Kind::Interpolated)
      m.rows[std::size_t(mu)] = interpolate_row(m, double(mu));
  return m;
}

ClickDistribution interpolate_row(const ResponseMatrix &m, double mu) {
  std::vector<int> all;
  const std::vector<int> *support = &m.support;
  if (support->empty()) {
    all.resize(std::size_t(m.mu_max) + 1);
    for (int i = 0; i <= m.mu_max; ++i)
      all[std::size_t(i)] = i;
    support = &all;
  }
  if (!std::isfinite(mu) || mu < support->front() || mu > support->back())
    throw ExtrapolationError("interpolate_row: mu=" + std::to_string(mu) +
                             " outside the support hull [" + std::to_string(support->front()) +
                             ", " + std::to_string(support->back()) + "]");

  const auto hi_it = std::lower_bound(support->begin(), support->end(), mu,
                                      [](int s, double v) { return double(s) < v; });
  const int hi = *hi_it;
  if (double(hi) == mu)
    return m.rows.at(std::size_t(hi));
  const int lo = *(hi_it - 1);
  const double t = (mu - lo) / double(hi - lo);
  const auto &a = m.rows.at(std::size_t(lo)).probs;
  const auto &b = m.rows.at(std::size_t(hi)).probs;

  ClickDistribution out{std::vector<double>(a.size()), Coherent{mu}};
  double total = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    out.probs[n] = (1.0 - t) * a[n] + t * b[n];
    total += out.probs[n];
  }
  if (total > 0.0)
    for (double &p : out.probs)
      p /= total;
  return out;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    acc += std::abs(x - y);
  }
  return 0.5 * acc;
}

double interpolation_error(const ResponseMatrix &m, const SystemConfig &config, double mu) {
  const auto approx = interpolate_row(m, mu);
  const auto exact = coherent_click_distribution(mu, config.weights(), config.detector);
  return total_variation(approx.probs, exact.probs);
}

bool fingerprint_matches(const ResponseMatrix &m, const SystemConfig &config) {
  return m.fingerprint == fingerprint(config);
}

MatrixFormat format_for_path(const std::filesystem::path &path) {
  return path.extension() == ".json" ? MatrixFormat::Json : MatrixFormat::Csv;
}

void write_matrix_csv(const ResponseMatrix &m, std::ostream &out) {
  out << kCsvMagic << ", fingerprint=" << m.fingerprint << ", mu_max=" << m.mu_max
      << ", bins=" << m.bins << ", method=" << m.method_string() << '\n';
  char buf[32];
  for (int mu = 0; mu <= m.mu_max; ++mu) {
    out << mu;
    for (double p : m.rows[std::size_t(mu)].probs) {
      std::snprintf(buf, sizeof buf, "%.17g", p);
      out << ',' << buf;
    }
    out << '\n';
  }
}

ResponseMatrix read_matrix_csv(std::istream &in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line))
    throw ParseError("empty matrix file", line_no);
  if (line.rfind(kCsvMagic, 0) != 0)
    throw ParseError("header: expected '" + std::string(kCsvMagic) + ", ...'", line_no);

  ResponseMatrix m;
  bool have_fp = false, have_mu = false, have_bins = false, have_method = false;
  std::string method_text;
  const auto fields = split(line.substr(std::string(kCsvMagic).size()), ',');
  for (const auto &raw : fields) {
    const std::string f = trim(raw);
    if (f.empty())
      continue;
    const auto eq = f.find('=');
    if (eq == std::string::npos)
      throw ParseError("header: field '" + f + "' is not key=value", line_no);
    const std::string key = f.substr(0, eq), value = f.substr(eq + 1);
    if (key == "fingerprint") {
      m.fingerprint = value;
      have_fp = true;
    } else if (key == "mu_max") {
      m.mu_max = parse_number<int>(value, "header mu_max", line_no);
      have_mu = true;
    } else if (key == "bins") {
      m.bins = parse_number<std::size_t>(value, "header bins", line_no);
      have_bins = true;
    } else if (key == "method") {
      method_text = value;
      have_method = true;
    } else {
      throw ParseError("header: unknown field '" + key + "'", line_no);
    }
  }
  if (!have_fp || !have_mu || !have_bins || !have_method)
    throw ParseError("header: fingerprint, mu_max, bins and method are all required", line_no);
  if (m.mu_max < 1 || m.bins < 1)
    throw ParseError("header: mu_max and bins must be >= 1", line_no);
  m.method = parse_method(method_text, m.support, line_no);

  m.rows.resize(std::size_t(m.mu_max) + 1);
  for (int mu = 0; mu <= m.mu_max; ++mu) {
    ++line_no;
    if (!std::getline(in, line))
      throw ParseError("truncated file: expected row for mu=" + std::to_string(mu), line_no);
    const auto cols = split(trim(line), ',');
    if (cols.size() != m.bins + 2)
      throw ParseError("row mu=" + std::to_string(mu) + ": expected " +
                           std::to_string(m.bins + 2) + " fields, got " +
                           std::to_string(cols.size()),
                       line_no);
    if (parse_number<int>(cols[0], "mu", line_no) != mu)
      throw ParseError("rows must be ordered mu=0..mu_max; expected mu=" + std::to_string(mu),
                       line_no);
    auto &row = m.rows[std::size_t(mu)];
    row.source = Coherent{double(mu)};
    row.probs.resize(m.bins + 1);
    for (std::size_t n = 0; n <= m.bins; ++n) {
      const double p = parse_number<double>(cols[n + 1], "p" + std::to_string(n), line_no);
      if (!(p >= 0.0 && p <= 1.0))
        throw ParseError("p" + std::to_string(n) + ": probability outside [0,1]", line_no);
      row.probs[n] = p;
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty())
      throw ParseError("unexpected content after the last row", line_no);
  }
  assign_provenance(m);
  return m;
}

json matrix_to_json(const ResponseMatrix &m) {
  json rows = json::array();
  for (const auto &r : m.rows)
    rows.push_back(r.probs);
  return {{"format", "binflux-matrix"}, {"version", 1},      {"fingerprint", m.fingerprint},
          {"mu_max", m.mu_max},         {"bins", m.bins},    {"method", m.method_string()},
          {"rows", rows}};
}

ResponseMatrix matrix_from_json(const json &j) {
  try {
    if (j.at("format").get<std::string>() != "binflux-matrix" || j.at("version").get<int>() != 1)
      throw ParseError("not a binflux-matrix v1 document");
    ResponseMatrix m;
    m.fingerprint = j.at("fingerprint").get<std::string>();
    m.mu_max = j.at("mu_max").get<int>();
    m.bins = j.at("bins").get<std::size_t>();
    m.method = parse_method(j.at("method").get<std::string>(), m.support, 0);
    const auto &rows = j.at("rows");
    if (m.mu_max < 1 || rows.size() != std::size_t(m.mu_max) + 1)
      throw ParseError("rows: expected mu_max+1 rows");
    for (std::size_t mu = 0; mu < rows.size(); ++mu) {
      auto probs = rows[mu].get<std::vector<double>>();
      if (probs.size() != m.bins + 1)
        throw ParseError("rows[" + std::to_string(mu) + "]: expected bins+1 entries");
      m.rows.push_back(ClickDistribution{std::move(probs), Coherent{double(mu)}});
    }
    assign_provenance(m);
    return m;
  } catch (const json::exception &e) {
    throw ParseError(std::string("matrix JSON: ") + e.what());
  }
}

void save_matrix(const ResponseMatrix &m, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot open '" + path.string() + "' for writing");
  if (format_for_path(path) == MatrixFormat::Json)
    out << matrix_to_json(m).dump(1) << '\n';
  else
    write_matrix_csv(m, out);
  if (!out)
    throw Error("failed writing '" + path.string() + "'");
}

ResponseMatrix load_matrix(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open '" + path.string() + "'");
  if (format_for_path(path) == MatrixFormat::Json) {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception &e) {
      throw ParseError(std::string("matrix JSON: ") + e.what());
    }
    return matrix_from_json(j);
  }
  return read_matrix_csv(in);
}

} // namespace binflux
