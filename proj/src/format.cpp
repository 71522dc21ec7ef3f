#include "absaudit/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "absaudit/error.hpp"

namespace absaudit {

namespace {

struct Token {
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;
};

struct Line {
  std::size_t number = 0;
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  const Token& operator[](std::size_t i) const { return tokens[i]; }
};

[[noreturn]] void fail(const Token& t, const std::string& why) { throw ParseError(t.line, t.column, why); }

[[noreturn]] void fail_after(const Line& l, const std::string& why) {
  const Token& last = l.tokens.back();
  throw ParseError(last.line, last.column + last.text.size(), why);
}

// Whitespace separates tokens; ',', ':' and '|' are tokens of their own;
// '#' starts a comment. Blank lines are dropped.
std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      const char c = raw[i];
      if (c == '#') break;
      if (c == ' ' || c == '\t') {
        ++i;
        continue;
      }
      if (c == ',' || c == ':' || c == '|') {
        line.tokens.push_back({std::string(1, c), number, i + 1});
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < raw.size() && std::strchr(" \t,:|#", raw[j]) == nullptr) ++j;
      line.tokens.push_back({std::string(raw.substr(i, j - i)), number, i + 1});
      i = j;
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : lines_(tokenize(text)) {
    if (lines_.empty()) throw ParseError(1, 1, "empty document: expected '" + std::string(kFormatHeader) + "'");
    const Line& h = lines_.front();
    if (h[0].text != "absaudit-format") fail(h[0], "expected '" + std::string(kFormatHeader) + "'");
    if (h.size() != 2) fail_after(h, "expected a format version");
    if (h[1].text != "1") fail(h[1], "unsupported format version '" + h[1].text + "'");
    pos_ = 1;
  }

  bool done() const { return pos_ >= lines_.size(); }
  const Line& next() { return lines_.at(pos_++); }
  const Line& peek() const { return lines_.at(pos_); }

  /// Location just past the last line, for errors at end of input.
  [[noreturn]] void fail_eof(const std::string& why) const {
    const Line& l = lines_.back();
    throw ParseError(l.number + 1, 1, why);
  }

  /// Body lines of a block up to its `end` line, which is returned separately.
  std::pair<std::vector<Line>, Line> block(const Token& opener) {
    std::vector<Line> body;
    while (!done()) {
      const Line& l = next();
      if (l[0].text == "end") {
        if (l.size() != 1) fail(l[1], "unexpected token after 'end'");
        return {std::move(body), l};
      }
      body.push_back(l);
    }
    fail(opener, "block '" + opener.text + "' is not closed by 'end'");
  }

 private:
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

double parse_number(const Token& t) {
  double v = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) fail(t, "expected a number, found '" + t.text + "'");
  if (v < 0.0) fail(t, "negative probability " + t.text);
  return v;
}

void expect_arity(const Line& l, std::size_t n, const std::string& what) {
  if (l.size() < n) fail_after(l, "incomplete " + what);
  if (l.size() > n) fail(l[n], "unexpected token '" + l[n].text + "'");
}

std::size_t find_token(const Line& l, std::string_view text, std::size_t from = 0) {
  for (std::size_t i = from; i < l.size(); ++i)
    if (l[i].text == text) return i;
  return l.size();
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::size_t value_index(const Token& t, const Variable& v) {
  auto idx = v.domain.index_of(t.text);
  if (!idx) fail(t, "value '" + t.text + "' is not in the domain of " + v.name);
  return *idx;
}

std::size_t value_index(const Token& t, const ExogenousVariable& v) {
  auto idx = v.domain.index_of(t.text);
  if (!idx) fail(t, "value '" + t.text + "' is not in the domain of " + v.name);
  return *idx;
}

FiniteDomain domain_from(const Line& l, std::size_t first, std::size_t last) {
  if (first >= last) {
    if (first < l.size()) fail(l[first], "empty domain");
    fail_after(l, "empty domain");
  }
  std::vector<std::string> values;
  std::set<std::string> seen;
  for (std::size_t i = first; i < last; ++i) {
    if (l[i].text == "," || l[i].text == ":" || l[i].text == "|") fail(l[i], "unexpected '" + l[i].text + "'");
    if (!seen.insert(l[i].text).second) fail(l[i], "duplicate domain value '" + l[i].text + "'");
    values.push_back(l[i].text);
  }
  return FiniteDomain(std::move(values));
}

// Splits `a b, c d, e` into comma-separated groups of tokens.
std::vector<std::vector<Token>> comma_groups(const Line& l, std::size_t from) {
  std::vector<std::vector<Token>> groups(1);
  for (std::size_t i = from; i < l.size(); ++i) {
    if (l[i].text == ",") {
      if (groups.back().empty()) fail(l[i], "empty entry before ','");
      groups.emplace_back();
    } else {
      groups.back().push_back(l[i]);
    }
  }
  if (groups.back().empty()) fail_after(l, "expected an entry");
  return groups;
}

// Weighted targets: each group is `v1 .. vk` (only when alone) or `v1 .. vk w`.
// Returns (tokens of target values, weight) per group.
std::vector<std::pair<std::vector<Token>, double>> weighted_groups(const Line& l, std::size_t from, std::size_t k) {
  auto groups = comma_groups(l, from);
  std::vector<std::pair<std::vector<Token>, double>> out;
  double total = 0.0;
  for (auto& g : groups) {
    if (g.size() == k && groups.size() == 1) {
      out.push_back({g, 1.0});
    } else if (g.size() == k + 1) {
      double w = parse_number(g.back());
      if (w == 0.0) fail(g.back(), "weights must be positive; omit zero-weight targets");
      g.pop_back();
      out.push_back({g, w});
    } else {
      fail(g.front(), "expected " + std::to_string(k) + " value(s) and a weight");
    }
    total += out.back().second;
  }
  if (std::abs(total - 1.0) > kTolerance) {
    std::ostringstream os;
    os << "weights sum to " << total << ", not 1";
    fail(l[from], os.str());
  }
  return out;
}

// -------------------------------------------------------------- models

struct RawEndogenous {
  Line line;
  std::vector<Token> parents;
};

struct RawExogenous {
  Line line;
  Token attached;
};

}  // namespace

std::string format_probability(double p) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p);
  if (ec != std::errc()) throw InvalidArgument("cannot format probability");
  return std::string(buf, ptr);
}

Scm parse_model(std::string_view text) {
  Reader rd(text);
  if (rd.done()) rd.fail_eof("expected 'model NAME'");
  Scm scm;
  const Line model_line = rd.next();
  if (model_line[0].text != "model") fail(model_line[0], "expected 'model NAME'");
  expect_arity(model_line, 2, "model line");
  scm.name = model_line[1].text;

  std::vector<RawEndogenous> endo;
  std::vector<RawExogenous> exo;
  std::optional<std::pair<Line, std::vector<Line>>> dist_block;
  std::vector<std::pair<Line, std::pair<std::vector<Line>, Line>>> mech_blocks;

  while (!rd.done()) {
    const Line l = rd.next();
    const std::string& kw = l[0].text;
    if (kw == "endogenous") {
      // endogenous NAME : v1 v2 ... [<- P1 P2 ...]
      if (l.size() < 2) fail_after(l, "expected a variable name");
      if (l.size() < 3 || l[2].text != ":") fail(l.size() < 3 ? l[1] : l[2], "expected ':' after the variable name");
      const std::size_t arrow = find_token(l, "<-");
      RawEndogenous r{l, {}};
      for (std::size_t i = arrow + 1; i < l.size(); ++i) r.parents.push_back(l[i]);
      if (arrow < l.size() && r.parents.empty()) fail_after(l, "expected parent names after '<-'");
      scm.endogenous.push_back({l[1].text, domain_from(l, 3, arrow)});
      endo.push_back(std::move(r));
    } else if (kw == "exogenous") {
      // exogenous NAME : v1 v2 ... -> X
      if (l.size() < 2) fail_after(l, "expected a variable name");
      if (l.size() < 3 || l[2].text != ":") fail(l.size() < 3 ? l[1] : l[2], "expected ':' after the variable name");
      const std::size_t arrow = find_token(l, "->");
      if (arrow == l.size()) fail_after(l, "expected '-> X' naming the endogenous variable it feeds");
      if (arrow + 2 != l.size()) {
        if (arrow + 1 == l.size()) fail_after(l, "expected a variable after '->'");
        fail(l[arrow + 2], "unexpected token '" + l[arrow + 2].text + "'");
      }
      scm.exogenous.push_back({l[1].text, domain_from(l, 3, arrow), 0});
      exo.push_back({l, l[arrow + 1]});
    } else if (kw == "distribution") {
      if (dist_block) fail(l[0], "duplicate distribution block");
      auto [body, end] = rd.block(l[0]);
      dist_block.emplace(l, std::move(body));
    } else if (kw == "mechanism") {
      auto b = rd.block(l[0]);
      mech_blocks.emplace_back(l, std::move(b));
    } else {
      fail(l[0], "unknown keyword '" + kw + "'");
    }
  }

  // Names.
  std::map<std::string, std::size_t> endo_index, exo_index;
  for (std::size_t i = 0; i < endo.size(); ++i)
    if (!endo_index.emplace(scm.endogenous[i].name, i).second)
      fail(endo[i].line[1], "duplicate variable name '" + scm.endogenous[i].name + "'");
  for (std::size_t i = 0; i < exo.size(); ++i) {
    const auto& name = scm.exogenous[i].name;
    if (endo_index.count(name) || !exo_index.emplace(name, i).second)
      fail(exo[i].line[1], "duplicate variable name '" + name + "'");
  }
  if (endo.empty()) rd.fail_eof("model declares no endogenous variables");

  // Exogenous attachment: exactly one per endogenous variable.
  std::vector<std::optional<std::size_t>> exo_of(endo.size());
  for (std::size_t i = 0; i < exo.size(); ++i) {
    auto it = endo_index.find(exo[i].attached.text);
    if (it == endo_index.end()) fail(exo[i].attached, "unknown endogenous variable '" + exo[i].attached.text + "'");
    if (exo_of[it->second])
      fail(exo[i].line[1], "endogenous variable " + it->first + " already has an exogenous variable");
    exo_of[it->second] = i;
    scm.exogenous[i].attached = it->second;
  }
  for (std::size_t i = 0; i < endo.size(); ++i)
    if (!exo_of[i]) fail(endo[i].line[1], "no exogenous variable feeds " + scm.endogenous[i].name);

  // Parents.
  std::vector<std::vector<std::size_t>> parents(endo.size());
  for (std::size_t i = 0; i < endo.size(); ++i) {
    std::set<std::size_t> seen;
    for (const auto& t : endo[i].parents) {
      auto it = endo_index.find(t.text);
      if (it == endo_index.end()) fail(t, "unknown parent '" + t.text + "'");
      if (it->second == i) fail(t, scm.endogenous[i].name + " is its own parent: cycle detected");
      if (!seen.insert(it->second).second) fail(t, "parent '" + t.text + "' listed twice");
      parents[i].push_back(it->second);
    }
  }

  // Exogenous distribution.
  if (!dist_block) rd.fail_eof("missing distribution block");
  {
    const Line& h = dist_block->first;
    std::vector<std::size_t> order;  // header position -> exogenous index
    std::set<std::size_t> seen;
    for (std::size_t i = 1; i < h.size(); ++i) {
      auto it = exo_index.find(h[i].text);
      if (it == exo_index.end()) fail(h[i], "unknown exogenous variable '" + h[i].text + "'");
      if (!seen.insert(it->second).second) fail(h[i], "exogenous variable '" + h[i].text + "' listed twice");
      order.push_back(it->second);
    }
    if (order.size() != exo.size()) fail_after(h, "distribution must list every exogenous variable");
    std::vector<std::size_t> shape;
    for (const auto& u : scm.exogenous) shape.push_back(u.domain.size());
    const std::size_t states = product_size(shape);
    if (states > EnumerationLimits{}.max_states) fail(h[0], "exogenous state space too large to tabulate");
    scm.exogenous_dist.assign(states, 0.0);
    std::vector<bool> listed(states, false);
    for (const auto& row : dist_block->second) {
      if (row.size() != order.size() + 2 || row[order.size()].text != ":")
        fail(row[0], "expected " + std::to_string(order.size()) + " value(s), ':' and a probability");
      std::vector<std::size_t> values(order.size());
      for (std::size_t k = 0; k < order.size(); ++k) values[order[k]] = value_index(row[k], scm.exogenous[order[k]]);
      const std::size_t idx = encode_index(values, shape);
      if (listed[idx]) fail(row[0], "duplicate distribution row");
      listed[idx] = true;
      const double p = parse_number(row[order.size() + 1]);
      if (p > 1.0 + kTolerance) fail(row[order.size() + 1], "probability above 1");
      scm.exogenous_dist[idx] = p;
    }
    double total = 0.0;
    for (double p : scm.exogenous_dist) total += p;
    if (std::abs(total - 1.0) > kTolerance) {
      std::ostringstream os;
      os << "exogenous distribution not normalized (sum " << total << ")";
      fail(h[0], os.str());
    }
  }

  // Mechanisms.
  scm.mechanisms.resize(endo.size());
  std::vector<bool> have(endo.size(), false);
  for (const auto& [h, blk] : mech_blocks) {
    // mechanism X | P1 .. Pk U
    if (h.size() < 2) fail_after(h, "expected the variable name");
    auto it = endo_index.find(h[1].text);
    if (it == endo_index.end()) fail(h[1], "unknown endogenous variable '" + h[1].text + "'");
    const std::size_t x = it->second;
    if (have[x]) fail(h[1], "duplicate mechanism for " + h[1].text);
    have[x] = true;
    if (h.size() < 3 || h[2].text != "|") fail_after(h, "expected '|' followed by the parents and exogenous variable");
    const auto& pa = parents[x];
    const auto& u = scm.exogenous[*exo_of[x]];
    if (h.size() != pa.size() + 4) fail(h[1], "mechanism inputs must be the parents of " + h[1].text + " followed by " + u.name);
    for (std::size_t k = 0; k < pa.size(); ++k)
      if (h[3 + k].text != scm.endogenous[pa[k]].name)
        fail(h[3 + k], "expected parent '" + scm.endogenous[pa[k]].name + "'");
    if (h[3 + pa.size()].text != u.name) fail(h[3 + pa.size()], "expected exogenous variable '" + u.name + "'");

    std::vector<std::size_t> shape;
    for (auto p : pa) shape.push_back(scm.endogenous[p].domain.size());
    shape.push_back(u.domain.size());
    const std::size_t rows = product_size(shape);
    if (rows > EnumerationLimits{}.max_states) fail(h[0], "mechanism table too large");
    Mechanism m{pa, std::vector<std::size_t>(rows, 0)};
    std::vector<bool> defined(rows, false);
    const std::size_t k = shape.size();
    for (const auto& row : blk.first) {
      if (row.size() != k + 2 || row[k].text != ":")
        fail(row[0], "expected " + std::to_string(k) + " input value(s), ':' and an output value");
      std::vector<std::size_t> values(k);
      for (std::size_t i = 0; i + 1 < k; ++i) values[i] = value_index(row[i], scm.endogenous[pa[i]]);
      values[k - 1] = value_index(row[k - 1], u);
      const std::size_t idx = encode_index(values, shape);
      if (defined[idx]) fail(row[0], "duplicate mechanism row");
      defined[idx] = true;
      m.table[idx] = value_index(row[k + 1], scm.endogenous[x]);
    }
    for (std::size_t r = 0; r < rows; ++r)
      if (!defined[r]) {
        auto values = decode_index(r, shape);
        std::string missing;
        for (std::size_t i = 0; i < k; ++i) {
          if (i) missing += ' ';
          missing += i + 1 < k ? scm.endogenous[pa[i]].domain.label(values[i]) : u.domain.label(values[i]);
        }
        fail(blk.second[0], "mechanism of " + h[1].text + " is not total: missing row '" + missing + "'");
      }
    scm.mechanisms[x] = std::move(m);
  }
  for (std::size_t i = 0; i < endo.size(); ++i)
    if (!have[i]) {
      // Parentless variables without a block are not defaulted: every table is explicit.
      fail(endo[i].line[1], "no mechanism for " + scm.endogenous[i].name);
    }

  auto report = validate_scm(scm);
  if (report.has_errors()) {
    for (const auto& d : report.defects)
      if (d.severity == Severity::Error) fail(model_line[0], d.message);
  }
  return scm;
}

std::string emit_model(const Scm& scm) {
  std::ostringstream os;
  os << kFormatHeader << "\n";
  os << "model " << scm.name << "\n\n";

  std::size_t name_w = 0;
  for (const auto& x : scm.endogenous) name_w = std::max(name_w, x.name.size());
  for (const auto& u : scm.exogenous) name_w = std::max(name_w, u.name.size());
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i];
    return s;
  };
  for (std::size_t i = 0; i < scm.endogenous.size(); ++i) {
    const auto& x = scm.endogenous[i];
    os << "endogenous " << pad(x.name, name_w) << " : " << join(x.domain.values());
    const auto& pa = scm.mechanisms.at(i).parents;
    if (!pa.empty()) {
      os << " <-";
      for (auto p : pa) os << ' ' << scm.endogenous[p].name;
    }
    os << "\n";
  }
  for (const auto& u : scm.exogenous)
    os << "exogenous  " << pad(u.name, name_w) << " : " << join(u.domain.values()) << " -> "
       << scm.endogenous.at(u.attached).name << "\n";

  auto width_of = [](const FiniteDomain& d) {
    std::size_t w = 0;
    for (const auto& v : d.values()) w = std::max(w, v.size());
    return w;
  };

  os << "\ndistribution";
  std::vector<std::size_t> shape, widths;
  for (const auto& u : scm.exogenous) {
    os << ' ' << u.name;
    shape.push_back(u.domain.size());
    widths.push_back(width_of(u.domain));
  }
  os << "\n";
  for (std::size_t s = 0; s < scm.exogenous_dist.size(); ++s) {
    if (scm.exogenous_dist[s] == 0.0) continue;
    auto values = decode_index(s, shape);
    os << " ";
    for (std::size_t k = 0; k < values.size(); ++k) os << ' ' << pad(scm.exogenous[k].domain.label(values[k]), widths[k]);
    os << " : " << format_probability(scm.exogenous_dist[s]) << "\n";
  }
  os << "end\n";

  for (std::size_t i = 0; i < scm.endogenous.size(); ++i) {
    const auto& m = scm.mechanisms.at(i);
    const auto& u = scm.exogenous.at(*scm.exogenous_for(i));
    os << "\nmechanism " << scm.endogenous[i].name << " |";
    std::vector<const FiniteDomain*> doms;
    for (auto p : m.parents) {
      os << ' ' << scm.endogenous[p].name;
      doms.push_back(&scm.endogenous[p].domain);
    }
    os << ' ' << u.name << "\n";
    doms.push_back(&u.domain);
    std::vector<std::size_t> mshape, mwidths;
    for (const auto* d : doms) {
      mshape.push_back(d->size());
      mwidths.push_back(width_of(*d));
    }
    for (std::size_t r = 0; r < m.table.size(); ++r) {
      auto values = decode_index(r, mshape);
      os << " ";
      for (std::size_t k = 0; k < values.size(); ++k) os << ' ' << pad(doms[k]->label(values[k]), mwidths[k]);
      os << " : " << scm.endogenous[i].domain.label(m.table[r]) << "\n";
    }
    os << "end\n";
  }
  return os.str();
}

// ---------------------------------------------------------- abstractions

namespace {

struct RawAbstraction {
  Line opener;
  std::optional<Line> source, target, direction;
  std::optional<std::pair<Line, std::vector<Line>>> nodes, edges;
  std::vector<std::pair<Line, std::vector<Line>>> outcomes;
};

RawAbstraction read_abstraction(std::string_view text) {
  Reader rd(text);
  if (rd.done()) rd.fail_eof("expected 'abstraction'");
  RawAbstraction raw{rd.next(), {}, {}, {}, {}, {}, {}};
  if (raw.opener[0].text != "abstraction") fail(raw.opener[0], "expected 'abstraction'");
  expect_arity(raw.opener, 1, "abstraction line");
  while (!rd.done()) {
    const Line l = rd.next();
    const std::string& kw = l[0].text;
    auto once = [&](std::optional<Line>& slot) {
      if (slot) fail(l[0], "duplicate '" + kw + "' line");
      expect_arity(l, 2, kw + " line");
      slot = l;
    };
    if (kw == "source") {
      once(raw.source);
    } else if (kw == "target") {
      once(raw.target);
    } else if (kw == "direction") {
      once(raw.direction);
    } else if (kw == "nodes" || kw == "edges") {
      auto& slot = kw == "nodes" ? raw.nodes : raw.edges;
      if (slot) fail(l[0], "duplicate '" + kw + "' block");
      expect_arity(l, 1, kw + " line");
      slot.emplace(l, rd.block(l[0]).first);
    } else if (kw == "outcome") {
      raw.outcomes.emplace_back(l, rd.block(l[0]).first);
    } else {
      fail(l[0], "unknown keyword '" + kw + "'");
    }
  }
  if (!raw.source) rd.fail_eof("missing 'source' line");
  if (!raw.target) rd.fail_eof("missing 'target' line");
  if (!raw.nodes) rd.fail_eof("missing 'nodes' block");
  return raw;
}

std::size_t endogenous_index(const Token& t, const Scm& scm, const char* which) {
  auto i = scm.find_endogenous(t.text);
  if (!i) fail(t, "unknown " + std::string(which) + " variable '" + t.text + "'");
  return *i;
}

}  // namespace

AbstractionRefs read_abstraction_refs(std::string_view text) {
  auto raw = read_abstraction(text);
  return {(*raw.source)[1].text, (*raw.target)[1].text};
}

Abstraction parse_abstraction(std::string_view text, std::shared_ptr<const Scm> source,
                              std::shared_ptr<const Scm> target) {
  if (!source || !target) throw InvalidArgument("parse_abstraction needs both models");
  const auto raw = read_abstraction(text);
  Abstraction a;
  a.source = source;
  a.target = target;
  a.source_ref = (*raw.source)[1].text;
  a.target_ref = (*raw.target)[1].text;
  if (raw.direction) {
    const Token& d = (*raw.direction)[1];
    if (d.text == "micro-to-macro")
      a.direction = Direction::MicroToMacro;
    else if (d.text == "macro-to-micro")
      a.direction = Direction::MacroToMicro;
    else
      fail(d, "direction must be 'micro-to-macro' or 'macro-to-micro'");
  }

  // nodes: S -> S'   |   T -> S' 0.5, C' 0.5
  auto& nm = a.structural.node_map;
  nm = Matrix(source->endogenous.size(), target->endogenous.size());
  std::vector<bool> seen_node(source->endogenous.size(), false);
  for (const auto& row : raw.nodes->second) {
    if (row.size() < 3 || row[1].text != "->") fail(row.size() < 2 ? row[0] : row[1], "expected 'NODE -> NODE'");
    const std::size_t s = endogenous_index(row[0], *source, "source");
    if (seen_node[s]) fail(row[0], "node " + row[0].text + " mapped twice");
    seen_node[s] = true;
    for (const auto& [tokens, w] : weighted_groups(row, 2, 1)) {
      const std::size_t t = endogenous_index(tokens[0], *target, "target");
      if (nm(s, t) != 0.0) fail(tokens[0], "target " + tokens[0].text + " listed twice");
      nm(s, t) = w;
    }
  }

  if (raw.edges) {
    const Dag gs = underlying_graph(*source);
    const Dag gt = underlying_graph(*target);
    EdgeMap em;
    for (const auto& row : raw.edges->second) {
      expect_arity(row, 3, "edge entry 'PATH -> PATH'");
      if (row[1].text != "->") fail(row[1], "expected '->'");
      Morphism from, to;
      try {
        from = parse_exponential(gs, row[0].text);
      } catch (const InvalidArgument& e) {
        fail(row[0], e.what());
      }
      try {
        to = parse_exponential(gt, row[2].text);
      } catch (const InvalidArgument& e) {
        fail(row[2], e.what());
      }
      if (!em.emplace(from, to).second) fail(row[0], "path " + row[0].text + " mapped twice");
    }
    a.structural.edge_map = std::move(em);
  }

  if (!raw.outcomes.empty()) {
    OutcomeMap om;
    const bool global = raw.outcomes.front().first.size() >= 2 && raw.outcomes.front().first[1].text == "global";
    om.granularity = global ? Granularity::Global : Granularity::PerVariable;
    if (global) {
      if (raw.outcomes.size() != 1) fail(raw.outcomes[1].first[0], "a global outcome map must be the only outcome block");
      const auto& [h, body] = raw.outcomes.front();
      expect_arity(h, 2, "outcome header");
      std::vector<std::size_t> sshape, tshape;
      for (const auto& v : source->endogenous) sshape.push_back(v.domain.size());
      for (const auto& v : target->endogenous) tshape.push_back(v.domain.size());
      const std::size_t rows = product_size(sshape), cols = product_size(tshape);
      if (rows > EnumerationLimits{}.max_states || cols > EnumerationLimits{}.max_states ||
          rows * cols > EnumerationLimits{}.max_states)
        fail(h[1], "global outcome map too large to tabulate");
      om.global = Matrix(rows, cols);
      std::vector<bool> defined(rows, false);
      const std::size_t ns = sshape.size(), nt = tshape.size();
      for (const auto& row : body) {
        if (row.size() < ns + 2 || row[ns].text != "->")
          fail(row[0], "expected " + std::to_string(ns) + " source value(s) and '->'");
        std::vector<std::size_t> sv(ns);
        for (std::size_t k = 0; k < ns; ++k) sv[k] = value_index(row[k], source->endogenous[k]);
        const std::size_t r = encode_index(sv, sshape);
        if (defined[r]) fail(row[0], "duplicate outcome row");
        defined[r] = true;
        for (const auto& [tokens, w] : weighted_groups(row, ns + 1, nt)) {
          std::vector<std::size_t> tv(nt);
          for (std::size_t k = 0; k < nt; ++k) tv[k] = value_index(tokens[k], target->endogenous[k]);
          const std::size_t c = encode_index(tv, tshape);
          if (om.global(r, c) != 0.0) fail(tokens[0], "target outcome listed twice");
          om.global(r, c) = w;
        }
      }
    } else {
      std::set<std::size_t> targets_seen;
      for (const auto& [h, body] : raw.outcomes) {
        // outcome X' <- S T
        if (h.size() >= 2 && h[1].text == "global") fail(h[1], "cannot mix global and per-variable outcome maps");
        if (h.size() < 4 || h[2].text != "<-") fail(h.size() < 3 ? h[0] : h[2], "expected 'outcome X' <- SOURCE...'");
        VariableOutcomeMap vm;
        vm.target = endogenous_index(h[1], *target, "target");
        if (!targets_seen.insert(vm.target).second) fail(h[1], "duplicate outcome block for " + h[1].text);
        std::vector<std::size_t> listed;
        for (std::size_t i = 3; i < h.size(); ++i) {
          const std::size_t s = endogenous_index(h[i], *source, "source");
          if (std::find(listed.begin(), listed.end(), s) != listed.end()) fail(h[i], h[i].text + " listed twice");
          listed.push_back(s);
        }
        std::vector<std::size_t> expected;
        for (std::size_t s = 0; s < nm.rows(); ++s) {
          auto c = nm.one_hot_column(s);
          if (!nm.row_is_zero(s) && !c) fail(h[0], "outcome maps need a deterministic node map");
          if (c && *c == vm.target) expected.push_back(s);
        }
        vm.block = listed;
        std::sort(vm.block.begin(), vm.block.end());
        if (vm.block != expected) {
          std::string names;
          for (auto s : expected) names += (names.empty() ? "" : " ") + source->endogenous[s].name;
          fail(h[3], "outcome block for " + h[1].text + " must list its preimage {" + names + "}");
        }
        std::vector<std::size_t> shape;
        for (auto s : vm.block) shape.push_back(source->endogenous[s].domain.size());
        const std::size_t rows = product_size(shape);
        if (rows > EnumerationLimits{}.max_states) fail(h[1], "outcome block too large to tabulate");
        const auto& tvar = target->endogenous[vm.target];
        vm.matrix = Matrix(rows, tvar.domain.size());
        std::vector<bool> defined(rows, false);
        const std::size_t k = listed.size();
        for (const auto& row : body) {
          if (row.size() < k + 2 || row[k].text != "->")
            fail(row[0], "expected " + std::to_string(k) + " source value(s) and '->'");
          std::vector<std::size_t> values(k);
          for (std::size_t i = 0; i < k; ++i) {
            const auto pos = std::find(vm.block.begin(), vm.block.end(), listed[i]) - vm.block.begin();
            values[pos] = value_index(row[i], source->endogenous[listed[i]]);
          }
          const std::size_t r = encode_index(values, shape);
          if (defined[r]) fail(row[0], "duplicate outcome row");
          defined[r] = true;
          for (const auto& [tokens, w] : weighted_groups(row, k + 1, 1)) {
            const std::size_t c = value_index(tokens[0], tvar);
            if (vm.matrix(r, c) != 0.0) fail(tokens[0], "target outcome listed twice");
            vm.matrix(r, c) = w;
          }
        }
        om.per_variable.push_back(std::move(vm));
      }
      std::sort(om.per_variable.begin(), om.per_variable.end(),
                [](const auto& x, const auto& y) { return x.target < y.target; });
    }
    a.outcomes = std::move(om);
  }

  auto report = validate_abstraction(a);
  for (const auto& d : report.defects)
    if (d.severity == Severity::Error) fail(raw.opener[0], d.message);
  return a;
}

std::string emit_abstraction(const Abstraction& a) {
  std::ostringstream os;
  os << kFormatHeader << "\n";
  os << "abstraction\n";
  os << "source " << a.source_ref << "\n";
  os << "target " << a.target_ref << "\n";
  os << "direction " << (a.direction == Direction::MicroToMacro ? "micro-to-macro" : "macro-to-micro") << "\n";

  const Scm& src = *a.source;
  const Scm& tgt = *a.target;
  const auto& nm = a.structural.node_map;
  auto weighted = [](const std::vector<std::pair<std::string, double>>& entries) {
    std::string s;
    if (entries.size() == 1 && entries[0].second == 1.0) return entries[0].first;
    for (std::size_t i = 0; i < entries.size(); ++i)
      s += (i ? ", " : "") + entries[i].first + " " + format_probability(entries[i].second);
    return s;
  };

  os << "\nnodes\n";
  std::size_t w = 0;
  for (std::size_t r = 0; r < nm.rows(); ++r)
    if (!nm.row_is_zero(r)) w = std::max(w, src.endogenous[r].name.size());
  for (std::size_t r = 0; r < nm.rows(); ++r) {
    if (nm.row_is_zero(r)) continue;
    std::vector<std::pair<std::string, double>> entries;
    for (std::size_t c = 0; c < nm.cols(); ++c)
      if (nm(r, c) != 0.0) entries.emplace_back(tgt.endogenous[c].name, nm(r, c));
    os << "  " << pad(src.endogenous[r].name, w) << " -> " << weighted(entries) << "\n";
  }
  os << "end\n";

  if (a.structural.edge_map) {
    const Dag gs = underlying_graph(src);
    const Dag gt = underlying_graph(tgt);
    os << "\nedges\n";
    std::size_t ew = 0;
    for (const auto& [p, q] : *a.structural.edge_map) ew = std::max(ew, to_exponential(gs, p).size());
    for (const auto& [p, q] : *a.structural.edge_map)
      os << "  " << pad(to_exponential(gs, p), ew) << " -> " << to_exponential(gt, q) << "\n";
    os << "end\n";
  }

  auto emit_rows = [&](const Matrix& m, const std::vector<const Variable*>& from,
                       const std::vector<const Variable*>& to) {
    std::vector<std::size_t> fshape, fwidth, tshape;
    for (const auto* v : from) {
      fshape.push_back(v->domain.size());
      std::size_t fw = 0;
      for (const auto& l : v->domain.values()) fw = std::max(fw, l.size());
      fwidth.push_back(fw);
    }
    for (const auto* v : to) tshape.push_back(v->domain.size());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (m.row_is_zero(r)) continue;
      auto values = decode_index(r, fshape);
      os << " ";
      for (std::size_t k = 0; k < values.size(); ++k) os << ' ' << pad(from[k]->domain.label(values[k]), fwidth[k]);
      std::vector<std::pair<std::string, double>> entries;
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (m(r, c) == 0.0) continue;
        auto tv = decode_index(c, tshape);
        std::string label;
        for (std::size_t k = 0; k < tv.size(); ++k) label += (k ? " " : "") + to[k]->domain.label(tv[k]);
        entries.emplace_back(label, m(r, c));
      }
      os << " -> " << weighted(entries) << "\n";
    }
    os << "end\n";
  };

  if (a.outcomes) {
    const auto& om = *a.outcomes;
    if (om.granularity == Granularity::Global) {
      std::vector<const Variable*> from, to;
      for (const auto& v : src.endogenous) from.push_back(&v);
      for (const auto& v : tgt.endogenous) to.push_back(&v);
      os << "\noutcome global\n";
      emit_rows(om.global, from, to);
    } else {
      for (const auto& vm : om.per_variable) {
        os << "\noutcome " << tgt.endogenous[vm.target].name << " <-";
        std::vector<const Variable*> from;
        for (auto s : vm.block) {
          os << ' ' << src.endogenous[s].name;
          from.push_back(&src.endogenous[s]);
        }
        os << "\n";
        emit_rows(vm.matrix, from, {&tgt.endogenous[vm.target]});
      }
    }
  }
  return os.str();
}

// ---------------------------------------------------------- distributions

Distribution parse_distribution(std::string_view text, const Scm& scm) {
  Reader rd(text);
  if (rd.done()) rd.fail_eof("expected 'distribution VAR...'");
  const Line h = rd.next();
  if (h[0].text != "distribution") fail(h[0], "expected 'distribution VAR...'");
  if (h.size() < 2) fail_after(h, "expected at least one variable");
  auto [body, end] = rd.block(h[0]);
  if (!rd.done()) fail(rd.peek()[0], "unexpected content after the distribution block");

  std::vector<std::size_t> listed;
  for (std::size_t i = 1; i < h.size(); ++i) {
    const std::size_t v = endogenous_index(h[i], scm, "model");
    if (std::find(listed.begin(), listed.end(), v) != listed.end()) fail(h[i], h[i].text + " listed twice");
    listed.push_back(v);
  }
  std::vector<std::size_t> scope = listed;
  std::sort(scope.begin(), scope.end());
  Distribution d;
  std::vector<std::size_t> shape;
  for (auto v : scope) {
    d.scope.push_back(scm.endogenous[v]);
    shape.push_back(scm.endogenous[v].domain.size());
  }
  const std::size_t n = product_size(shape);
  if (n > EnumerationLimits{}.max_states) fail(h[0], "distribution too large to tabulate");
  d.table.assign(n, 0.0);
  std::vector<bool> defined(n, false);
  const std::size_t k = listed.size();
  for (const auto& row : body) {
    if (row.size() != k + 2 || row[k].text != ":")
      fail(row[0], "expected " + std::to_string(k) + " value(s), ':' and a probability");
    std::vector<std::size_t> values(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto pos = std::find(scope.begin(), scope.end(), listed[i]) - scope.begin();
      values[pos] = value_index(row[i], scm.endogenous[listed[i]]);
    }
    const std::size_t idx = encode_index(values, shape);
    if (defined[idx]) fail(row[0], "duplicate distribution row");
    defined[idx] = true;
    d.table[idx] = parse_number(row[k + 1]);
  }
  if (std::abs(d.total() - 1.0) > kTolerance) {
    std::ostringstream os;
    os << "distribution not normalized (sum " << d.total() << ")";
    fail(h[0], os.str());
  }
  return d;
}

std::string emit_distribution(const Distribution& dist) {
  std::ostringstream os;
  os << kFormatHeader << "\n";
  os << "distribution";
  std::vector<std::size_t> widths;
  for (const auto& v : dist.scope) {
    os << ' ' << v.name;
    std::size_t w = 0;
    for (const auto& l : v.domain.values()) w = std::max(w, l.size());
    widths.push_back(w);
  }
  os << "\n";
  const auto shape = dist.shape();
  for (std::size_t i = 0; i < dist.table.size(); ++i) {
    if (dist.table[i] == 0.0) continue;
    auto values = decode_index(i, shape);
    os << " ";
    for (std::size_t k = 0; k < values.size(); ++k) os << ' ' << pad(dist.scope[k].domain.label(values[k]), widths[k]);
    os << " : " << format_probability(dist.table[i]) << "\n";
  }
  os << "end\n";
  return os.str();
}

// --------------------------------------------------------------- tables

PropertyMatrix parse_matrix(std::string_view text) {
  Reader rd(text);
  if (rd.done()) rd.fail_eof("expected 'table structural|distributional'");
  const Line h = rd.next();
  if (h[0].text != "table") fail(h[0], "expected 'table structural|distributional'");
  expect_arity(h, 2, "table line");
  PropertyMatrix m;
  if (h[1].text == "structural")
    m.layer = Layer::Structural;
  else if (h[1].text == "distributional")
    m.layer = Layer::Distributional;
  else
    fail(h[1], "unknown layer '" + h[1].text + "'");
  if (rd.done()) rd.fail_eof("expected 'columns ...'");
  const Line cols = rd.next();
  if (cols[0].text != "columns") fail(cols[0], "expected 'columns ...'");
  if (cols.size() < 2) fail_after(cols, "expected column names");
  for (std::size_t i = 1; i < cols.size(); ++i) m.cols.push_back(cols[i].text);
  auto [body, end] = rd.block(h[0]);
  if (!rd.done()) fail(rd.peek()[0], "unexpected content after the table");
  for (const auto& row : body) {
    if (row.size() < 2 || row[1].text != ":") fail(row[0], "expected 'PROPERTY : cells'");
    if (row.size() != m.cols.size() + 2)
      fail(row[0], "expected " + std::to_string(m.cols.size()) + " cells in row " + row[0].text);
    m.rows.push_back(row[0].text);
    std::vector<Cell> cells;
    for (std::size_t i = 2; i < row.size(); ++i) {
      auto c = cell_from_symbol(row[i].text);
      if (!c) fail(row[i], "unknown cell '" + row[i].text + "' (expected ✓, × or -)");
      cells.push_back(*c);
    }
    m.cells.push_back(std::move(cells));
  }
  return m;
}

std::string emit_matrix(const PropertyMatrix& m) {
  std::ostringstream os;
  os << kFormatHeader << "\n";
  os << "table " << to_string(m.layer) << "\n";
  os << "columns";
  for (const auto& c : m.cols) os << ' ' << c;
  os << "\n";
  std::size_t w = 0;
  for (const auto& r : m.rows) w = std::max(w, r.size());
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    os << "  " << pad(m.rows[r], w) << " :";
    for (auto c : m.cells[r]) os << ' ' << symbol(c);
    os << "\n";
  }
  os << "end\n";
  return os.str();
}

// ------------------------------------------------------------------ dot

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void emit_cluster(std::ostringstream& os, const Scm& scm, const std::string& prefix, const std::string& label) {
  os << "  subgraph " << quoted("cluster_" + prefix) << " {\n";
  os << "    label=" << quoted(label) << ";\n";
  for (const auto& v : scm.endogenous)
    os << "    " << quoted(prefix + ":" + v.name) << " [label=" << quoted(v.name) << "];\n";
  const Dag g = underlying_graph(scm);
  for (auto [u, v] : g.edges())
    os << "    " << quoted(prefix + ":" + scm.endogenous[u].name) << " -> "
       << quoted(prefix + ":" + scm.endogenous[v].name) << ";\n";
  os << "  }\n";
}

}  // namespace

std::string emit_dot(const Scm& scm) {
  std::ostringstream os;
  os << "digraph " << quoted(scm.name) << " {\n";
  os << "  node [shape=circle];\n";
  for (const auto& v : scm.endogenous) os << "  " << quoted(v.name) << ";\n";
  const Dag g = underlying_graph(scm);
  for (auto [u, v] : g.edges())
    os << "  " << quoted(scm.endogenous[u].name) << " -> " << quoted(scm.endogenous[v].name) << ";\n";
  os << "}\n";
  return os.str();
}

std::string emit_dot(const Abstraction& a) {
  const bool up = a.direction == Direction::MicroToMacro;
  std::ostringstream os;
  os << "digraph abstraction {\n";
  os << "  rankdir=TB;\n";
  os << "  node [shape=circle];\n";
  // Micro cluster first so it is drawn on top.
  if (up) {
    emit_cluster(os, *a.source, "source", a.source->name + " (micro)");
    emit_cluster(os, *a.target, "target", a.target->name + " (macro)");
  } else {
    emit_cluster(os, *a.target, "target", a.target->name + " (micro)");
    emit_cluster(os, *a.source, "source", a.source->name + " (macro)");
  }
  const auto& nm = a.structural.node_map;
  for (std::size_t r = 0; r < nm.rows(); ++r)
    for (std::size_t c = 0; c < nm.cols(); ++c) {
      if (nm(r, c) == 0.0) continue;
      const std::string s = quoted("source:" + a.source->endogenous[r].name);
      const std::string t = quoted("target:" + a.target->endogenous[c].name);
      std::string attrs = "style=dotted";
      if (nm(r, c) != 1.0) attrs += ", label=" + quoted(format_probability(nm(r, c)));
      if (up)
        os << "  " << s << " -> " << t << " [" << attrs << "];\n";
      else
        os << "  " << t << " -> " << s << " [" << attrs << ", dir=back];\n";
    }
  os << "}\n";
  return os.str();
}

}  // namespace absaudit
