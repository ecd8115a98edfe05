#include "hsgd/io/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "hsgd/error.hpp"

namespace hsgd::io {

namespace {

struct Token {
  std::string text;
  int column = 0;
};

struct Line {
  int number = 0;
  std::vector<Token> tokens;

  SourceLocation at(std::size_t i = 0) const {
    return SourceLocation{number, i < tokens.size() ? tokens[i].column : 1};
  }
  const std::string& word(std::size_t i) const { return tokens[i].text; }
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view raw = text.substr(start, end - start);
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      const std::size_t b = i;
      while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      if (i > b) line.tokens.push_back(Token{std::string(raw.substr(b, i - b)), static_cast<int>(b) + 1});
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

const std::set<std::string, std::less<>> kBlocks{"diagram", "scale",    "topology",   "aggregation", "coupling",
                                                 "symbols", "rules",    "objectives", "scenario"};

bool valid_id(std::string_view s) {
  if (s.empty() || s == "->" || s == "<-" || s == "=" || s == ":") return false;
  return std::none_of(s.begin(), s.end(), [](char c) { return c == '.' || c == ',' || c == '=' || c == '#'; });
}

std::string fmt_num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

enum class RefKind { diagram, state, arc, symbol };

struct PendingRef {
  RefKind kind;
  DiagramId diagram;
  std::string id;
  SourceLocation loc;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lines_(tokenize(text)) {}

  ParseResult parse() {
    if (lines_.empty()) {
      diag("E_EMPTY", "model text has no statements", {1, 1});
      return finish();
    }
    while (pos_ < lines_.size()) {
      const Line& head = lines_[pos_];
      const std::string& kw = head.word(0);
      if (kBlocks.count(kw) == 0) {
        diag("E_SYNTAX", "expected a block keyword, found '" + kw + "'", head.at());
        ++pos_;
        continue;
      }
      ++pos_;
      std::vector<const Line*> body;
      bool closed = false;
      while (pos_ < lines_.size()) {
        const Line& l = lines_[pos_];
        if (l.word(0) == "end" && l.tokens.size() == 1) {
          closed = true;
          ++pos_;
          break;
        }
        // A header-shaped line starts the next block.
        if (kBlocks.count(l.word(0)) != 0 && l.tokens.size() <= 2) break;
        body.push_back(&l);
        ++pos_;
      }
      if (!closed) diag("E_UNTERMINATED", "block '" + kw + "' is missing its 'end'", head.at());
      block(head, body);
    }
    resolve();
    return finish();
  }

 private:
  ParseResult finish() {
    ParseResult r;
    std::stable_sort(diags_.begin(), diags_.end(), [](const Diagnostic& a, const Diagnostic& b) {
      return std::tie(a.location.line, a.location.column) < std::tie(b.location.line, b.location.column);
    });
    r.diagnostics = std::move(diags_);
    if (r.diagnostics.empty()) r.document = std::move(doc_);
    return r;
  }

  void diag(std::string code, std::string message, SourceLocation loc) {
    diags_.push_back(Diagnostic{std::move(code), std::move(message), loc});
  }

  bool arity(const Line& l, std::size_t min, std::size_t max = 0) {
    const std::size_t n = l.tokens.size();
    if (n < min || (max != 0 && n > max)) {
      diag("E_SYNTAX", "wrong number of fields for '" + l.word(0) + "'", l.at());
      return false;
    }
    return true;
  }

  bool id(const Line& l, std::size_t i, std::string& out) {
    if (i >= l.tokens.size() || !valid_id(l.word(i))) {
      diag("E_BAD_ID", "expected an identifier" + (i < l.tokens.size() ? ", found '" + l.word(i) + "'" : ""),
           l.at(std::min(i, l.tokens.size() - 1)));
      return false;
    }
    out = l.word(i);
    return true;
  }

  bool qualified(const Line& l, std::size_t i, std::string& diagram, std::string& item) {
    if (i >= l.tokens.size()) return arity(l, i + 1);
    const std::string& w = l.word(i);
    const auto dot = w.find('.');
    if (dot == std::string::npos || !valid_id(w.substr(0, dot)) || !valid_id(w.substr(dot + 1))) {
      diag("E_BAD_ID", "expected <diagram>.<id>, found '" + w + "'", l.at(i));
      return false;
    }
    diagram = w.substr(0, dot);
    item = w.substr(dot + 1);
    return true;
  }

  template <class T>
  bool number(const Line& l, std::size_t i, T& out) {
    if (i >= l.tokens.size()) return arity(l, i + 1);
    const std::string& w = l.word(i);
    if constexpr (std::is_floating_point_v<T>) {
      if (w == "inf" || w == "-inf") {
        out = w == "inf" ? HUGE_VAL : -HUGE_VAL;
        return true;
      }
    }
    const char* b = w.data();
    const char* e = w.data() + w.size();
    if (*b == '+') ++b;
    const auto r = std::from_chars(b, e, out);
    if (r.ec != std::errc() || r.ptr != e) {
      diag("E_NUMBER", "malformed number '" + w + "'", l.at(i));
      return false;
    }
    return true;
  }

  bool keyword(const Line& l, std::size_t i, std::string_view kw) {
    if (i < l.tokens.size() && l.word(i) == kw) return true;
    diag("E_SYNTAX", "expected '" + std::string(kw) + "'", l.at(std::min(i, l.tokens.size() - 1)));
    return false;
  }

  void remember(const std::string& key, SourceLocation loc) {
    if (!doc_.locations.emplace(key, loc).second) {
      diag("E_DUPLICATE", "duplicate " + key, loc);
    }
  }

  void ref(RefKind kind, DiagramId diagram, std::string item, SourceLocation loc) {
    refs_.push_back(PendingRef{kind, std::move(diagram), std::move(item), loc});
  }

  void block(const Line& head, const std::vector<const Line*>& body) {
    const std::string& kw = head.word(0);
    if (kw == "diagram") return diagram(head, body);
    if (kw == "scale") return scale(head, body);
    if (kw == "topology") return topology(head, body);
    if (kw == "aggregation") return aggregation(head, body);
    if (kw == "coupling") return coupling(head, body);
    if (kw == "symbols") return symbols(head, body);
    if (kw == "rules") return rules(head, body);
    if (kw == "objectives") return objectives(head, body);
    scenario(head, body);
  }

  void diagram(const Line& head, const std::vector<const Line*>& body) {
    CanonicalDiagram d;
    if (!arity(head, 2, 2) || !id(head, 1, d.id)) return;
    remember("diagram " + d.id, head.at(1));
    bool has_partition = false;
    bool has_initial = false;
    bool has_final = false;
    for (const Line* lp : body) {
      const Line& l = *lp;
      const std::string& kw = l.word(0);
      if (kw == "population") {
        if (arity(l, 2, 2)) number(l, 1, d.population);
      } else if (kw == "partition") {
        if (!arity(l, 2)) continue;
        d.partition.boundaries.clear();
        for (std::size_t i = 1; i < l.tokens.size(); ++i) {
          Tick t = 0;
          if (number(l, i, t)) d.partition.boundaries.push_back(t);
        }
        has_partition = true;
      } else if (kw == "state") {
        StateNode s;
        if (!arity(l, 4) || !id(l, 1, s.id)) continue;
        for (std::size_t i = 2; i < l.tokens.size(); i += 2) {
          if (i + 1 >= l.tokens.size()) {
            diag("E_SYNTAX", "option '" + l.word(i) + "' needs a value", l.at(i));
            break;
          }
          const std::string& opt = l.word(i);
          if (opt == "rank") {
            number(l, i + 1, s.rank);
          } else if (opt == "interval") {
            int v = 0;
            if (number(l, i + 1, v)) s.level_interval = v;
          } else if (opt == "dwell") {
            Tick v = 0;
            if (number(l, i + 1, v)) s.dwell_limit = v;
          } else {
            diag("E_SYNTAX", "unknown state option '" + opt + "'", l.at(i));
          }
        }
        remember("state " + d.id + "." + s.id, l.at(1));
        d.states.push_back(s);
      } else if (kw == "initial" || kw == "final") {
        std::string s;
        if (!arity(l, 2, 2) || !id(l, 1, s)) continue;
        (kw == "initial" ? d.initial : d.final_state) = s;
        (kw == "initial" ? has_initial : has_final) = true;
        ref(RefKind::state, d.id, s, l.at(1));
      } else if (kw == "arc" || kw == "backstep") {
        Arc a;
        a.kind = kw == "arc" ? ArcKind::forward : ArcKind::backstep;
        a.transit = 0;
        if (!arity(l, kw == "arc" ? 7 : 5, 7) || !id(l, 1, a.id) || !id(l, 2, a.source) || !keyword(l, 3, "->") ||
            !id(l, 4, a.target)) {
          continue;
        }
        if (l.tokens.size() != 5 && (l.tokens.size() != 7 || !keyword(l, 5, "transit") || !number(l, 6, a.transit))) {
          if (l.tokens.size() == 6) diag("E_SYNTAX", "expected 'transit <ticks>'", l.at(5));
          continue;
        }
        remember("arc " + d.id + "." + a.id, l.at(1));
        ref(RefKind::state, d.id, a.source, l.at(2));
        ref(RefKind::state, d.id, a.target, l.at(4));
        d.arcs.push_back(a);
      } else if (kw == "mu") {
        int index = 0;
        if (!arity(l, 3) || !number(l, 1, index)) continue;
        if (d.mu.count(index) != 0) diag("E_DUPLICATE", "duplicate mu at boundary " + std::to_string(index), l.at(1));
        Distribution dist;
        for (std::size_t i = 2; i < l.tokens.size(); ++i) {
          const std::string& w = l.word(i);
          const auto eq = w.find('=');
          if (eq == std::string::npos || !valid_id(w.substr(0, eq))) {
            diag("E_SYNTAX", "expected <state>=<fraction>, found '" + w + "'", l.at(i));
            continue;
          }
          double v = 0.0;
          const std::string num = w.substr(eq + 1);
          const auto r = std::from_chars(num.data(), num.data() + num.size(), v);
          if (num.empty() || r.ec != std::errc() || r.ptr != num.data() + num.size()) {
            diag("E_NUMBER", "malformed fraction in '" + w + "'", l.at(i));
            continue;
          }
          dist[w.substr(0, eq)] = v;
          ref(RefKind::state, d.id, w.substr(0, eq), l.at(i));
        }
        d.mu[index] = dist;
      } else {
        diag("E_SYNTAX", "unknown diagram statement '" + kw + "'", l.at());
      }
    }
    if (!has_partition) diag("E_MISSING", "diagram " + d.id + " declares no partition", head.at(1));
    if (!has_initial) diag("E_MISSING", "diagram " + d.id + " declares no initial state", head.at(1));
    if (!has_final) diag("E_MISSING", "diagram " + d.id + " declares no final state", head.at(1));
    doc_.diagrams.push_back(std::move(d));
  }

  void scale(const Line& head, const std::vector<const Line*>& body) {
    DiagramId target;
    if (!arity(head, 2, 2) || !id(head, 1, target)) return;
    remember("scale " + target, head.at(1));
    ref(RefKind::diagram, target, "", head.at(1));
    Classifier c;
    std::vector<std::pair<std::string, SourceLocation>> parents;
    std::set<std::string> props;
    for (const Line* lp : body) {
      const Line& l = *lp;
      const std::string& kw = l.word(0);
      if (kw == "dimension") {
        if (arity(l, 2, 2)) number(l, 1, c.dimension);
        continue;
      }
      if (kw != "prop") {
        diag("E_SYNTAX", "unknown scale statement '" + kw + "'", l.at());
        continue;
      }
      Proposition p;
      if (!arity(l, 6) || !id(l, 1, p.id) || !keyword(l, 2, "state") || !id(l, 3, p.state) ||
          !keyword(l, 4, "rank") || !number(l, 5, p.state_rank)) {
        continue;
      }
      std::size_t i = 6;
      std::string parent;
      if (i < l.tokens.size() && l.word(i) == "parent") {
        if (!id(l, i + 1, parent)) continue;
        parents.emplace_back(parent, l.at(i + 1));
        i += 2;
      }
      if (i < l.tokens.size()) {
        if (!keyword(l, i, "where")) continue;
        ++i;
        if ((l.tokens.size() - i) % 4 != 0 || i == l.tokens.size()) {
          diag("E_SYNTAX", "predicates take the form x<i> in <lo> <hi>", l.at(i - 1));
          continue;
        }
        for (; i < l.tokens.size(); i += 4) {
          const std::string& var = l.word(i);
          Predicate pr;
          std::size_t index = 0;
          const auto r = std::from_chars(var.data() + 1, var.data() + var.size(), index);
          if (var.size() < 2 || var[0] != 'x' || r.ec != std::errc() || r.ptr != var.data() + var.size()) {
            diag("E_SYNTAX", "expected a parameter name x<i>, found '" + var + "'", l.at(i));
            break;
          }
          pr.parameter = index;
          double lo = 0.0;
          double hi = 0.0;
          if (!keyword(l, i + 1, "in") || !number(l, i + 2, lo) || !number(l, i + 3, hi)) break;
          if (!std::isinf(lo)) pr.lower = lo;
          if (!std::isinf(hi)) pr.upper = hi;
          p.predicates.push_back(pr);
        }
      }
      if (!props.insert(p.id).second) diag("E_DUPLICATE", "duplicate proposition " + p.id, l.at(1));
      doc_.locations.emplace("prop " + target + "." + p.id, l.at(1));
      (parent.empty() ? c.root : c.refinements[parent]).propositions.push_back(p);
    }
    for (const auto& [parent, loc] : parents) {
      if (props.count(parent) == 0) diag("E_UNDEF_NODE", "unknown parent proposition " + parent, loc);
    }
    doc_.scales[target] = std::move(c);
  }

  void topology(const Line& head, const std::vector<const Line*>& body) {
    if (!arity(head, 1, 1)) return;
    for (const Line* lp : body) {
      const Line& l = *lp;
      TopologyEdge e;
      if (!arity(l, 3) || !id(l, 0, e.parent) || !keyword(l, 1, ":")) continue;
      ref(RefKind::diagram, e.parent, "", l.at(0));
      remember("topology " + e.parent, l.at(0));
      for (std::size_t i = 2; i < l.tokens.size(); ++i) {
        std::string c;
        if (!id(l, i, c)) continue;
        ref(RefKind::diagram, c, "", l.at(i));
        e.children.push_back(c);
      }
      doc_.topology.push_back(std::move(e));
    }
  }

  void aggregation(const Line& head, const std::vector<const Line*>& body) {
    AggregationMap m;
    if (!arity(head, 2, 2) || !id(head, 1, m.parent)) return;
    remember("aggregation " + m.parent, head.at(1));
    ref(RefKind::diagram, m.parent, "", head.at(1));
    for (const Line* lp : body) {
      const Line& l = *lp;
      if (l.word(0) == "children") {
        if (!arity(l, 2)) continue;
        for (std::size_t i = 1; i < l.tokens.size(); ++i) {
          std::string c;
          if (!id(l, i, c)) continue;
          ref(RefKind::diagram, c, "", l.at(i));
          m.children.push_back(c);
        }
      } else if (l.word(0) == "block") {
        AggregationBlock b;
        if (!arity(l, 4) || !id(l, 1, b.parent_state) || !keyword(l, 2, "=")) continue;
        ref(RefKind::state, m.parent, b.parent_state, l.at(1));
        for (std::size_t i = 3; i < l.tokens.size(); ++i) {
          Combo combo;
          std::stringstream ss(l.word(i));
          std::string part;
          while (std::getline(ss, part, ',')) combo.push_back(part);
          if (std::any_of(combo.begin(), combo.end(), [](const std::string& s) { return !valid_id(s); })) {
            diag("E_BAD_ID", "malformed combo '" + l.word(i) + "'", l.at(i));
            continue;
          }
          combos_.push_back({m.parent, combo, l.at(i)});
          b.combos.push_back(std::move(combo));
        }
        m.blocks.push_back(std::move(b));
      } else {
        diag("E_SYNTAX", "unknown aggregation statement '" + l.word(0) + "'", l.at());
      }
    }
    doc_.aggregation.push_back(std::move(m));
  }

  void coupling(const Line& head, const std::vector<const Line*>& body) {
    if (!arity(head, 1, 1)) return;
    for (const Line* lp : body) {
      const Line& l = *lp;
      CoupledArc c;
      if (!arity(l, 3) || !qualified(l, 0, c.parent.diagram, c.parent.arc) || !keyword(l, 1, "<-")) continue;
      ref(RefKind::arc, c.parent.diagram, c.parent.arc, l.at(0));
      remember("coupling " + c.parent.str(), l.at(0));
      std::size_t i = 2;
      for (; i < l.tokens.size() && l.word(i) != "quorum"; ++i) {
        ArcRef child;
        if (!qualified(l, i, child.diagram, child.arc)) continue;
        ref(RefKind::arc, child.diagram, child.arc, l.at(i));
        c.children.push_back(child);
      }
      if (i < l.tokens.size()) {
        int q = 0;
        if (i + 2 != l.tokens.size()) {
          diag("E_SYNTAX", "quorum takes one value and ends the line", l.at(i));
        } else if (number(l, i + 1, q)) {
          c.quorum = q;
        }
      }
      doc_.couplings.push_back(std::move(c));
    }
  }

  void symbols(const Line& head, const std::vector<const Line*>& body) {
    if (!arity(head, 1, 1)) return;
    for (const Line* lp : body) {
      const Line& l = *lp;
      ControlSymbol s;
      if (!arity(l, 3, 5) || !id(l, 0, s.id)) continue;
      if (l.word(1) == "individual") {
        s.symbol_class = SymbolClass::individual;
      } else if (l.word(1) == "general") {
        s.symbol_class = SymbolClass::general;
      } else {
        diag("E_SYNTAX", "symbol class must be 'individual' or 'general'", l.at(1));
        continue;
      }
      if (!qualified(l, 2, s.arc.diagram, s.arc.arc)) continue;
      if (l.tokens.size() > 3 && (l.tokens.size() != 5 || !keyword(l, 3, "cost") || !number(l, 4, s.cost))) {
        if (l.tokens.size() != 5) diag("E_SYNTAX", "expected 'cost <value>'", l.at(3));
        continue;
      }
      remember("symbol " + s.id, l.at(0));
      ref(RefKind::arc, s.arc.diagram, s.arc.arc, l.at(2));
      doc_.rule.symbols.push_back(s);
    }
  }

  void rules(const Line& head, const std::vector<const Line*>& body) {
    DiagramId d;
    if (!arity(head, 2, 2) || !id(head, 1, d)) return;
    remember("rules " + d, head.at(1));
    ref(RefKind::diagram, d, "", head.at(1));
    auto& base = doc_.rules[d];
    for (const Line* lp : body) {
      const Line& l = *lp;
      TransitionRule r;
      if (!arity(l, 10, 12) || !id(l, 0, r.id) || !id(l, 1, r.from) || !keyword(l, 2, "->") || !id(l, 3, r.to) ||
          !keyword(l, 4, "control") || !id(l, 5, r.control) || !keyword(l, 6, "resource") ||
          !number(l, 7, r.resource) || !keyword(l, 8, "duration") || !number(l, 9, r.duration)) {
        continue;
      }
      if (l.tokens.size() != 10) {
        std::string sl;
        if (l.tokens.size() != 12 || !keyword(l, 10, "forbid") || !id(l, 11, sl)) {
          if (l.tokens.size() != 12) diag("E_SYNTAX", "expected 'forbid <state>'", l.at(10));
          continue;
        }
        r.forbidden_backstep = sl;
        ref(RefKind::state, d, sl, l.at(11));
      }
      remember("rule " + d + "." + r.id, l.at(0));
      ref(RefKind::state, d, r.from, l.at(1));
      ref(RefKind::state, d, r.to, l.at(3));
      ref(RefKind::symbol, "", r.control, l.at(5));
      base.push_back(r);
    }
  }

  void objectives(const Line& head, const std::vector<const Line*>& body) {
    ObjectivesTree t;
    if (!arity(head, 2, 2) || !id(head, 1, t.root)) return;
    remember("objectives", head.at(0));
    std::vector<std::pair<std::string, SourceLocation>> links{{t.root, head.at(1)}};
    for (const Line* lp : body) {
      const Line& l = *lp;
      ObjectiveNode n;
      const std::string& kw = l.word(0);
      if (kw == "leaf") {
        StateRef g;
        if (!arity(l, 3, 3) || !id(l, 1, n.id) || !qualified(l, 2, g.diagram, g.state)) continue;
        n.goal = g;
        ref(RefKind::state, g.diagram, g.state, l.at(2));
      } else if (kw == "all" || kw == "any" || kw == "kofn") {
        n.rule = kw == "all" ? LinkRule::all_children : kw == "any" ? LinkRule::any_child : LinkRule::k_of_n;
        std::size_t first = 2;
        if (!arity(l, kw == "kofn" ? 4 : 3) || !id(l, 1, n.id)) continue;
        if (kw == "kofn") {
          if (!number(l, 2, n.k)) continue;
          first = 3;
        }
        for (std::size_t i = first; i < l.tokens.size(); ++i) {
          std::string c;
          if (!id(l, i, c)) continue;
          links.emplace_back(c, l.at(i));
          n.children.push_back(c);
        }
      } else {
        diag("E_SYNTAX", "unknown objectives statement '" + kw + "'", l.at());
        continue;
      }
      remember("node " + n.id, l.at(1));
      t.nodes.push_back(std::move(n));
    }
    for (const auto& [node, loc] : links) {
      if (!t.find(node)) diag("E_UNDEF_NODE", "unknown objective node " + node, loc);
    }
    doc_.objectives = std::move(t);
  }

  void scenario(const Line& head, const std::vector<const Line*>& body) {
    ControlScenario s;
    if (!arity(head, 2, 2) || !id(head, 1, s.id)) return;
    remember("scenario " + s.id, head.at(1));
    bool has_horizon = false;
    for (const Line* lp : body) {
      const Line& l = *lp;
      const std::string& kw = l.word(0);
      if (kw == "horizon") {
        if (arity(l, 2, 2) && number(l, 1, s.horizon)) has_horizon = true;
      } else if (kw == "priority") {
        if (arity(l, 2, 2)) number(l, 1, s.priority);
      } else if (kw == "criterion") {
        if (arity(l, 7, 7) && keyword(l, 1, "rank") && number(l, 2, s.criterion.rank_weight) &&
            keyword(l, 3, "resource") && number(l, 4, s.criterion.resource_weight) && keyword(l, 5, "time")) {
          number(l, 6, s.criterion.time_weight);
        }
      } else if (kw == "at") {
        Tick t = 0;
        if (!arity(l, 3) || !number(l, 1, t)) continue;
        auto& set = s.schedule[t];
        for (std::size_t i = 2; i < l.tokens.size(); ++i) {
          std::string sym;
          if (!id(l, i, sym)) continue;
          ref(RefKind::symbol, "", sym, l.at(i));
          set.insert(sym);
        }
      } else if (kw == "guard") {
        BackstepGuard g;
        if (!arity(l, 4, 4) || !qualified(l, 1, g.state.diagram, g.state.state) || !number(l, 2, g.from) ||
            !number(l, 3, g.until)) {
          continue;
        }
        ref(RefKind::state, g.state.diagram, g.state.state, l.at(1));
        s.guards.push_back(g);
      } else {
        diag("E_SYNTAX", "unknown scenario statement '" + kw + "'", l.at());
      }
    }
    if (!has_horizon) diag("E_MISSING", "scenario " + s.id + " declares no horizon", head.at(1));
    doc_.scenarios.push_back(std::move(s));
  }

  const CanonicalDiagram* find(const DiagramId& id) const {
    for (const auto& d : doc_.diagrams) {
      if (d.id == id) return &d;
    }
    return nullptr;
  }

  void resolve() {
    for (const auto& r : refs_) {
      if (r.kind == RefKind::symbol) {
        if (std::any_of(doc_.rule.symbols.begin(), doc_.rule.symbols.end(),
                        [&](const ControlSymbol& s) { return s.id == r.id; })) {
          continue;
        }
        diag("E_UNDEF_SYMBOL", "undefined symbol " + r.id, r.loc);
        continue;
      }
      const CanonicalDiagram* d = find(r.diagram);
      if (d == nullptr) {
        diag("E_UNDEF_DIAGRAM", "undefined diagram " + r.diagram, r.loc);
      } else if (r.kind == RefKind::state && d->find_state(r.id) == nullptr) {
        diag("E_UNDEF_STATE", "undefined state " + r.id + " in diagram " + r.diagram, r.loc);
      } else if (r.kind == RefKind::arc && d->find_arc(r.id) == nullptr) {
        diag("E_UNDEF_ARC", "undefined arc " + r.id + " in diagram " + r.diagram, r.loc);
      }
    }
    // Combo entries follow the map's child order.
    for (const auto& [parent, combo, loc] : combos_) {
      const auto it = std::find_if(doc_.aggregation.begin(), doc_.aggregation.end(),
                                   [&](const AggregationMap& m) { return m.parent == parent; });
      if (it == doc_.aggregation.end()) continue;
      if (combo.size() != it->children.size()) {
        diag("E_SYNTAX", "combo has " + std::to_string(combo.size()) + " entries for " +
                             std::to_string(it->children.size()) + " children",
             loc);
        continue;
      }
      for (std::size_t i = 0; i < combo.size(); ++i) {
        const CanonicalDiagram* d = find(it->children[i]);
        if (d != nullptr && d->find_state(combo[i]) == nullptr) {
          diag("E_UNDEF_STATE", "undefined state " + combo[i] + " in diagram " + it->children[i], loc);
        }
      }
    }
  }

  struct ComboRef {
    DiagramId parent;
    Combo combo;
    SourceLocation loc;
  };

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
  ModelDocument doc_;
  std::vector<Diagnostic> diags_;
  std::vector<PendingRef> refs_;
  std::vector<ComboRef> combos_;
};

void write_props(std::ostream& os, const std::vector<Proposition>& props, const std::string& parent) {
  for (const auto& p : props) {
    os << "  prop " << p.id << " state " << p.state << " rank " << p.state_rank;
    if (!parent.empty()) os << " parent " << parent;
    if (!p.predicates.empty()) {
      os << " where";
      for (const auto& pr : p.predicates) {
        os << " x" << pr.parameter << " in " << fmt_num(pr.lower.value_or(-HUGE_VAL)) << ' '
           << fmt_num(pr.upper.value_or(HUGE_VAL));
      }
    }
    os << '\n';
  }
}

}  // namespace

std::string format_diagnostic(const Diagnostic& d) {
  return std::to_string(d.location.line) + ":" + std::to_string(d.location.column) + ": " + d.code + ": " +
         d.message;
}

const ControlScenario* ModelDocument::find_scenario(const std::string& id) const {
  for (const auto& s : scenarios) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::optional<SourceLocation> ModelDocument::locate(const std::string& key) const {
  const auto it = locations.find(key);
  if (it == locations.end()) return std::nullopt;
  return it->second;
}

bool ModelDocument::operator==(const ModelDocument& o) const {
  return diagrams == o.diagrams && scales == o.scales && topology == o.topology && aggregation == o.aggregation &&
         couplings == o.couplings && rule == o.rule && rules == o.rules && objectives == o.objectives &&
         scenarios == o.scenarios;
}

ParseResult parse_model(std::string_view text) { return Parser(text).parse(); }

std::string serialize_model(const ModelDocument& doc) {
  std::ostringstream os;
  for (const auto& d : doc.diagrams) {
    os << "diagram " << d.id << '\n';
    os << "  population " << d.population << '\n';
    os << "  partition";
    for (auto t : d.partition.boundaries) os << ' ' << t;
    os << '\n';
    for (const auto& s : d.states) {
      os << "  state " << s.id << " rank " << s.rank;
      if (s.level_interval) os << " interval " << *s.level_interval;
      if (s.dwell_limit) os << " dwell " << *s.dwell_limit;
      os << '\n';
    }
    os << "  initial " << d.initial << '\n';
    os << "  final " << d.final_state << '\n';
    for (const auto& a : d.arcs) {
      if (a.kind == ArcKind::forward) {
        os << "  arc " << a.id << ' ' << a.source << " -> " << a.target << " transit " << a.transit << '\n';
      } else {
        os << "  backstep " << a.id << ' ' << a.source << " -> " << a.target;
        if (a.transit != 0) os << " transit " << a.transit;
        os << '\n';
      }
    }
    for (const auto& [i, dist] : d.mu) {
      os << "  mu " << i;
      for (const auto& [s, v] : dist) os << ' ' << s << '=' << fmt_num(v);
      os << '\n';
    }
    os << "end\n\n";
  }
  for (const auto& [target, c] : doc.scales) {
    os << "scale " << target << '\n';
    os << "  dimension " << c.dimension << '\n';
    write_props(os, c.root.propositions, "");
    for (const auto& [parent, sc] : c.refinements) write_props(os, sc.propositions, parent);
    os << "end\n\n";
  }
  if (!doc.topology.empty()) {
    os << "topology\n";
    for (const auto& e : doc.topology) {
      os << "  " << e.parent << " :";
      for (const auto& c : e.children) os << ' ' << c;
      os << '\n';
    }
    os << "end\n\n";
  }
  for (const auto& m : doc.aggregation) {
    os << "aggregation " << m.parent << '\n';
    os << "  children";
    for (const auto& c : m.children) os << ' ' << c;
    os << '\n';
    for (const auto& b : m.blocks) {
      os << "  block " << b.parent_state << " =";
      for (const auto& combo : b.combos) {
        os << ' ';
        for (std::size_t i = 0; i < combo.size(); ++i) os << (i ? "," : "") << combo[i];
      }
      os << '\n';
    }
    os << "end\n\n";
  }
  if (!doc.couplings.empty()) {
    os << "coupling\n";
    for (const auto& c : doc.couplings) {
      os << "  " << c.parent.str() << " <-";
      for (const auto& ch : c.children) os << ' ' << ch.str();
      if (c.quorum) os << " quorum " << *c.quorum;
      os << '\n';
    }
    os << "end\n\n";
  }
  if (!doc.rule.symbols.empty()) {
    os << "symbols\n";
    for (const auto& s : doc.rule.symbols) {
      os << "  " << s.id << ' ' << (s.symbol_class == SymbolClass::general ? "general" : "individual") << ' '
         << s.arc.str() << " cost " << fmt_num(s.cost) << '\n';
    }
    os << "end\n\n";
  }
  for (const auto& [d, base] : doc.rules) {
    os << "rules " << d << '\n';
    for (const auto& r : base) {
      os << "  " << r.id << ' ' << r.from << " -> " << r.to << " control " << r.control << " resource "
         << fmt_num(r.resource) << " duration " << r.duration;
      if (r.forbidden_backstep) os << " forbid " << *r.forbidden_backstep;
      os << '\n';
    }
    os << "end\n\n";
  }
  if (doc.objectives) {
    os << "objectives " << doc.objectives->root << '\n';
    for (const auto& n : doc.objectives->nodes) {
      if (n.goal) {
        os << "  leaf " << n.id << ' ' << n.goal->str() << '\n';
        continue;
      }
      switch (n.rule) {
        case LinkRule::all_children: os << "  all " << n.id; break;
        case LinkRule::any_child: os << "  any " << n.id; break;
        case LinkRule::k_of_n: os << "  kofn " << n.id << ' ' << n.k; break;
      }
      for (const auto& c : n.children) os << ' ' << c;
      os << '\n';
    }
    os << "end\n\n";
  }
  for (const auto& s : doc.scenarios) {
    os << "scenario " << s.id << '\n';
    os << "  horizon " << s.horizon << '\n';
    os << "  priority " << s.priority << '\n';
    os << "  criterion rank " << fmt_num(s.criterion.rank_weight) << " resource "
       << fmt_num(s.criterion.resource_weight) << " time " << fmt_num(s.criterion.time_weight) << '\n';
    for (const auto& [t, syms] : s.schedule) {
      if (syms.empty()) continue;
      os << "  at " << t;
      for (const auto& sym : syms) os << ' ' << sym;
      os << '\n';
    }
    for (const auto& g : s.guards) {
      os << "  guard " << g.state.str() << ' ' << g.from << ' ' << g.until << '\n';
    }
    os << "end\n\n";
  }
  return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string model_hash(const ModelDocument& doc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize_model(doc))));
  return buf;
}

HsgdModel assemble_document(const ModelDocument& doc) {
  return assemble(doc.diagrams, doc.topology, doc.aggregation, doc.couplings, doc.rule);
}

ValidationReport validate_document(const ModelDocument& doc) {
  HsgdModel m;
  for (const auto& d : doc.diagrams) m.diagrams[d.id] = d;
  m.topology = doc.topology;
  for (const auto& a : doc.aggregation) m.aggregation[a.parent] = a;
  m.couplings = doc.couplings;
  m.rule = doc.rule;

  ValidationReport report = validate_model(m);
  auto scoped = [&](const std::string& scope, const ValidationReport& r) {
    for (const auto& i : r.issues) report.add(i.code, scope + ": " + i.message, i.subjects);
  };
  for (const auto& [target, c] : doc.scales) scoped("scale " + target, validate_classifier(c));
  for (const auto& [target, base] : doc.rules) {
    if (const auto* d = m.find_diagram(target)) scoped("rules " + target, validate_rules(base, *d, doc.rule.symbols));
  }
  if (doc.objectives) scoped("objectives", validate_objectives(*doc.objectives, m));
  for (const auto& s : doc.scenarios) scoped("scenario " + s.id, validate_scenario(m, s));
  return report;
}

}  // namespace hsgd::io
