#include "combo/wcnf.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "combo/errors.hpp"
#include "combo/rng.hpp"

namespace combo {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<double> normalize_weights(std::span<const double> weights, WeightNormalization mode) {
  std::vector<double> out(weights.begin(), weights.end());
  if (out.empty() || mode == WeightNormalization::kNone) return out;
  if (mode == WeightNormalization::kUnit) {
    const double top = *std::max_element(out.begin(), out.end());
    for (double& w : out) w /= top;
    return out;
  }
  const double n = static_cast<double>(out.size());
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / n;
  double ss = 0.0;
  for (double w : out) ss += (w - mean) * (w - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) {
    // all weights equal: every clause counts the same
    std::fill(out.begin(), out.end(), 1.0);
    return out;
  }
  for (double& w : out) w = (w - mean) / sd;
  return out;
}

WcnfInstance parse_wcnf(std::string_view text, WeightNormalization mode) {
  WcnfInstance inst;
  inst.normalization = mode;
  bool have_header = false;
  std::size_t header_line = 0;
  std::size_t declared = 0;
  std::optional<double> top;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "c" || tokens[0].front() == 'c') continue;

    if (tokens[0] == "p") {
      if (have_header) throw ParseError(line_no, "duplicate problem line");
      if (tokens.size() < 4 || tokens.size() > 5 || tokens[1] != "wcnf") {
        throw ParseError(line_no, "expected 'p wcnf <nvars> <nclauses> [top]'");
      }
      long long nv = 0;
      long long nc = 0;
      if (!parse_number(tokens[2], nv) || nv < 1) throw ParseError(line_no, "bad variable count");
      if (!parse_number(tokens[3], nc) || nc < 0) throw ParseError(line_no, "bad clause count");
      if (tokens.size() == 5) {
        double t = 0.0;
        if (!parse_number(tokens[4], t) || !(t > 0.0) || !std::isfinite(t)) throw ParseError(line_no, "bad top weight");
        top = t;
      }
      inst.n_vars = static_cast<std::size_t>(nv);
      declared = static_cast<std::size_t>(nc);
      have_header = true;
      header_line = line_no;
      continue;
    }

    if (!have_header) throw ParseError(line_no, "clause before the problem line");
    double weight = 0.0;
    if (!parse_number(tokens[0], weight) || !std::isfinite(weight)) throw ParseError(line_no, "bad clause weight");
    if (!(weight > 0.0)) throw ParseError(line_no, "clause weight must be positive");
    if (top && weight >= *top) throw ParseError(line_no, "hard clauses are not supported");

    WcnfClause clause;
    clause.weight = weight;
    bool terminated = false;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      if (terminated) throw ParseError(line_no, "tokens after the clause terminator");
      long long lit = 0;
      if (!parse_number(tokens[k], lit)) throw ParseError(line_no, "bad literal '" + std::string(tokens[k]) + "'");
      if (lit == 0) {
        terminated = true;
        continue;
      }
      if (static_cast<std::size_t>(std::llabs(lit)) > inst.n_vars) {
        throw ParseError(line_no, "literal " + std::to_string(lit) + " exceeds the variable count");
      }
      clause.literals.push_back(static_cast<int>(lit));
    }
    if (!terminated) throw ParseError(line_no, "clause is missing the terminating 0");
    if (clause.literals.empty()) throw ParseError(line_no, "empty clause");
    inst.clauses.push_back(std::move(clause));
  }

  if (!have_header) throw ParseError(line_no, "missing problem line");
  if (inst.clauses.size() != declared) {
    throw ParseError(header_line, "header declares " + std::to_string(declared) + " clauses but " +
                                      std::to_string(inst.clauses.size()) + " were read");
  }
  std::vector<double> raw;
  raw.reserve(inst.clauses.size());
  for (const auto& c : inst.clauses) raw.push_back(c.weight);
  inst.normalized_weights = normalize_weights(raw, mode);
  return inst;
}

WcnfInstance read_wcnf(const std::string& path, WeightNormalization mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open WCNF file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_wcnf(ss.str(), mode);
}

std::string serialize_wcnf(const WcnfInstance& instance) {
  std::string out = "p wcnf " + std::to_string(instance.n_vars) + " " + std::to_string(instance.clauses.size()) + "\n";
  char buf[64];
  for (const auto& c : instance.clauses) {
    std::snprintf(buf, sizeof buf, "%.17g", c.weight);
    out += buf;
    for (int lit : c.literals) out += " " + std::to_string(lit);
    out += " 0\n";
  }
  return out;
}

bool clause_satisfied(const WcnfClause& clause, const Vertex& x) {
  for (int lit : clause.literals) {
    const auto var = static_cast<std::size_t>(std::abs(lit)) - 1;
    if (var >= x.size()) throw BoundsError("assignment shorter than the clause variables");
    if ((lit > 0) == (x[var] != 0)) return true;
  }
  return false;
}

double wmaxsat_objective(const Vertex& x, const WcnfInstance& instance) {
  if (x.size() != instance.n_vars) {
    throw BoundsError("assignment has " + std::to_string(x.size()) + " entries, instance has " +
                      std::to_string(instance.n_vars) + " variables");
  }
  double total = 0.0;
  for (std::size_t c = 0; c < instance.clauses.size(); ++c) {
    if (clause_satisfied(instance.clauses[c], x)) total += instance.normalized_weights[c];
  }
  return -total;
}

WcnfInstance random_wcnf(std::size_t n_vars, std::size_t n_clauses, std::size_t max_len, int max_weight,
                         std::uint64_t seed, WeightNormalization mode) {
  if (n_vars == 0 || max_len == 0 || max_weight < 1) throw DomainError("random_wcnf: bad shape");
  Rng rng(seed);
  WcnfInstance inst;
  inst.n_vars = n_vars;
  inst.normalization = mode;
  std::vector<int> vars(n_vars);
  std::iota(vars.begin(), vars.end(), 1);
  for (std::size_t c = 0; c < n_clauses; ++c) {
    const std::size_t len = std::uniform_int_distribution<std::size_t>(1, std::min(max_len, n_vars))(rng);
    for (std::size_t k = 0; k < len; ++k) {
      std::swap(vars[k], vars[std::uniform_int_distribution<std::size_t>(k, n_vars - 1)(rng)]);
    }
    WcnfClause clause;
    clause.weight = std::uniform_int_distribution<int>(1, max_weight)(rng);
    for (std::size_t k = 0; k < len; ++k) {
      clause.literals.push_back(std::bernoulli_distribution(0.5)(rng) ? vars[k] : -vars[k]);
    }
    inst.clauses.push_back(std::move(clause));
  }
  std::vector<double> raw;
  for (const auto& c : inst.clauses) raw.push_back(c.weight);
  inst.normalized_weights = normalize_weights(raw, mode);
  return inst;
}

std::string to_string(WeightNormalization mode) {
  switch (mode) {
    case WeightNormalization::kStandardize:
      return "standardize";
    case WeightNormalization::kUnit:
      return "unit";
    case WeightNormalization::kNone:
      return "none";
  }
  return "standardize";
}

WeightNormalization weight_normalization_from_string(const std::string& name) {
  if (name == "standardize") return WeightNormalization::kStandardize;
  if (name == "unit") return WeightNormalization::kUnit;
  if (name == "none") return WeightNormalization::kNone;
  throw ConfigError("unknown weight normalization '" + name + "' (standardize, unit, none)");
}

}  // namespace combo
