#include "mnar/data_io.hpp"

#include <charconv>
#include <sstream>

#include "mnar/errors.hpp"

namespace mnar {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_int(const std::string& s, int& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

}  // namespace

StrataData read_strata_csv(const std::string& text, Family family) {
  if (family == Family::Geometric)
    throw UnsupportedError("the stratum CSV schema has no geometric form");
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  StrataData data;
  bool have_header = false;
  bool have_kappa = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = "line " + std::to_string(lineno);
    if (!have_header) {
      if (line != kStrataHeader)
        throw ConfigError(where, std::string("expected header '") + kStrataHeader + "'");
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 4) throw ConfigError(where, "expected 4 fields");
    int attempted = 0, responded = 0, x = 0;
    if (cells[0].empty()) throw ConfigError(where, "empty stratum_id");
    if (!parse_int(cells[1], attempted) || attempted < 1)
      throw ConfigError(where, "kappa_attempted must be a positive integer");
    if (!parse_int(cells[2], responded) || responded < 0)
      throw ConfigError(where, "kappa_responded must be a nonnegative integer");
    if (!have_kappa) {
      data.kappa_attempted = attempted;
      have_kappa = true;
    } else if (attempted != data.kappa_attempted) {
      throw ConfigError(where, "kappa_attempted must be the same on every row");
    }
    if (responded == 0) {
      if (!cells[3].empty() && cells[3] != "0")
        throw ConfigError(where, "x must be empty or 0 for a nonresponding stratum");
      if (family == Family::Bernoulli)
        throw ConfigError(where, "bernoulli data has no nonresponse rows");
      data.stratum_ids.push_back(cells[0]);
      data.outcomes.emplace_back(Nonresponse{});
      continue;
    }
    if (!parse_int(cells[3], x) || x < 0 || x > responded)
      throw ConfigError(where, "x must be an integer in [0, kappa_responded]");
    switch (family) {
      case Family::Binomial:
        if (responded > attempted)
          throw ConfigError(where, "kappa_responded exceeds kappa_attempted");
        data.outcomes.emplace_back(CountResponse{x, responded});
        break;
      case Family::Poisson:
        data.outcomes.emplace_back(CountResponse{x, responded});
        break;
      case Family::Bernoulli:
        if (responded != 1) throw ConfigError(where, "bernoulli rows need kappa_responded = 1");
        data.outcomes.emplace_back(BinaryResponse{x});
        break;
      case Family::Geometric:
        break;
    }
    data.stratum_ids.push_back(cells[0]);
  }
  if (!have_header) throw ConfigError("line 1", "missing header");
  if (data.outcomes.empty()) throw ConfigError("line " + std::to_string(lineno), "no data rows");
  return data;
}

std::string write_strata_csv(int kappa_attempted, const std::vector<Outcome>& outcomes) {
  std::ostringstream out;
  out << kStrataHeader << '\n';
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    out << (i + 1) << ',' << kappa_attempted << ',';
    const auto& o = outcomes[i];
    if (const auto* r = std::get_if<CountResponse>(&o)) {
      out << r->responders << ',' << r->x;
    } else if (const auto* b = std::get_if<BinaryResponse>(&o)) {
      out << 1 << ',' << b->y;
    } else if (std::holds_alternative<Nonresponse>(o)) {
      out << 0 << ',';
    } else {
      throw UnsupportedError("geometric outcomes have no stratum CSV form");
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mnar
