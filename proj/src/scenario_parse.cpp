#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fermitele/measurement.hpp"
#include "fermitele/scenario.hpp"

namespace fermitele {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

namespace {

struct Tok {
  std::string text;
  int col = 1;
};

std::vector<Tok> split_ws(const std::string& s, int offset) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    out.push_back({s.substr(i, j - i), offset + static_cast<int>(i)});
    i = j;
  }
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

bool matrices_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != b(i, j)) return false;
    }
  }
  return true;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Scenario run() {
    std::istringstream in(text_);
    std::string raw;
    bool header = false;
    bool have_orbitals = false;
    while (std::getline(in, raw)) {
      ++line_;
      std::string content = raw.substr(0, raw.find('#'));
      if (trim(content).empty()) continue;
      auto toks = split_ws(content, 1);
      const std::string& kw = toks.front().text;
      if (!header) {
        if (kw != "scenario") fail(toks.front().col, "missing scenario header");
        if (toks.size() != 2) fail(toks.front().col, "scenario expects exactly one name");
        out_.name = toks[1].text;
        header = true;
        continue;
      }
      if (kw == "scenario") fail(toks.front().col, "duplicate scenario header");
      if (kw == "orbitals") {
        if (have_orbitals) fail(toks.front().col, "orbitals declared twice");
        if (toks.size() < 2) fail(toks.front().col, "orbitals needs at least one label");
        if (toks.size() - 1 > kMaxOrbitals) fail(toks.front().col, "too many orbitals");
        for (std::size_t i = 1; i < toks.size(); ++i) {
          const auto& t = toks[i].text;
          if (t.find_first_of(",;:=+()") != std::string::npos) fail(toks[i].col, "invalid label '" + t + "'");
          if (index_.count(t)) fail(toks[i].col, "duplicate label '" + t + "'");
          index_[t] = out_.labels.size();
          out_.labels.push_back(t);
        }
        have_orbitals = true;
        continue;
      }
      if (!have_orbitals) fail(toks.front().col, "statement before orbitals declaration");
      out_.statements.push_back(statement(content, toks));
    }
    if (!header) {
      line_ = std::max(line_, 1);
      fail(1, "missing scenario header");
    }
    if (!have_orbitals) fail(1, "missing orbitals declaration");
    return out_;
  }

 private:
  [[noreturn]] void fail(int col, const std::string& msg) const { throw ParseError(line_, col, msg); }

  double number(const Tok& t) const {
    double v = 0.0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(t.col, "expected a number, got '" + t.text + "'");
    if (!std::isfinite(v)) fail(t.col, "non-finite number '" + t.text + "'");
    return v;
  }

  double tolerance(const Tok& t) const {
    double v = number(t);
    if (v < 0.0) fail(t.col, "tolerance must be non-negative");
    return v;
  }

  std::size_t label(const Tok& t) const {
    auto it = index_.find(t.text);
    if (it == index_.end()) fail(t.col, "undeclared label '" + t.text + "'");
    return it->second;
  }

  std::vector<std::size_t> labels(const std::vector<Tok>& toks, std::size_t from, bool distinct = true) const {
    std::vector<std::size_t> out;
    for (std::size_t i = from; i < toks.size(); ++i) {
      auto k = label(toks[i]);
      if (distinct && std::find(out.begin(), out.end(), k) != out.end()) {
        fail(toks[i].col, "label '" + toks[i].text + "' repeated");
      }
      out.push_back(k);
    }
    return out;
  }

  void arity(const std::vector<Tok>& toks, std::size_t n, const std::string& usage) const {
    if (toks.size() != n) fail(toks.front().col, "wrong number of arguments, expected: " + usage);
  }

  Matrix matrix(const std::string& text, int offset) const {
    const std::size_t m = out_.labels.size();
    std::vector<Complex> entries;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find(';', pos);
      if (end == std::string::npos) end = text.size();
      std::string cell = text.substr(pos, end - pos);
      int col = offset + static_cast<int>(pos);
      auto parts = split_ws(cell, col);
      if (parts.size() != 1) fail(col, "matrix entries are RE,IM separated by ';'");
      auto comma = parts[0].text.find(',');
      if (comma == std::string::npos) fail(parts[0].col, "matrix entry needs RE,IM");
      Tok re{parts[0].text.substr(0, comma), parts[0].col};
      Tok im{parts[0].text.substr(comma + 1), parts[0].col + static_cast<int>(comma) + 1};
      entries.emplace_back(number(re), number(im));
      pos = end + 1;
    }
    if (entries.size() != m * m) {
      fail(offset, "matrix needs " + std::to_string(m * m) + " entries, got " + std::to_string(entries.size()));
    }
    Matrix out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entries[i * m + j];
    }
    return out;
  }

  // Splits at the first ':'; returns false if there is none.
  bool split_colon(const std::string& content, std::vector<Tok>& head, std::string& tail, int& tail_col) const {
    auto c = content.find(':');
    if (c == std::string::npos) return false;
    head = split_ws(content.substr(0, c), 1);
    tail = content.substr(c + 1);
    tail_col = static_cast<int>(c) + 2;
    return true;
  }

  void check_axis(const Tok& t) const {
    try {
      SpinAxis::parse(t.text);
    } catch (const std::exception&) {
      fail(t.col, "unknown spin axis '" + t.text + "'");
    }
  }

  Statement statement(const std::string& content, const std::vector<Tok>& toks) {
    Statement s;
    s.line = line_;
    const std::string& kw = toks.front().text;
    const int kcol = toks.front().col;
    const bool init = kw == "filled" || kw == "term" || kw == "hole";
    if (init && started_) fail(kcol, "'" + kw + "' must precede all other statements");
    if (!init) started_ = true;

    if (kw == "filled") {
      arity(toks, 1, "filled");
      if (filled_ || any_term_) fail(kcol, "'filled' must come first and only once");
      filled_ = true;
      s.kind = StatementKind::kFilled;
    } else if (kw == "term" || kw == "hole") {
      std::vector<Tok> head;
      std::string tail;
      int tcol = 0;
      if (!split_colon(content, head, tail, tcol)) fail(kcol, "expected: " + kw + " RE IM : L1 [L2 ...]");
      arity(head, 3, kw + " RE IM : L1 [L2 ...]");
      if (kw == "term" && filled_) fail(kcol, "'term' after 'filled'; use 'hole'");
      if (kw == "hole" && !filled_) fail(kcol, "'hole' requires 'filled' first");
      s.kind = kw == "term" ? StatementKind::kTerm : StatementKind::kHole;
      s.coeff = Complex(number(head[1]), number(head[2]));
      auto tt = split_ws(tail, tcol);
      if (tt.empty()) fail(tcol, "expected at least one label");
      s.orbitals = labels(tt, 0);
      any_term_ = true;
    } else if (kw == "rotate") {
      arity(toks, 5, "rotate PAIR_UP PAIR_DN AXIS ANGLE");
      s.kind = StatementKind::kRotate;
      s.orbitals = labels(std::vector<Tok>(toks.begin() + 1, toks.begin() + 3), 0);
      check_axis(toks[3]);
      s.axis = toks[3].text;
      s.angle = number(toks[4]);
    } else if (kw == "unitary") {
      if (toks.size() < 2) fail(kcol, "expected: unitary RE,IM;...");
      s.kind = StatementKind::kUnitary;
      auto start = content.find("unitary") + 7;
      s.matrix = matrix(content.substr(start), static_cast<int>(start) + 1);
    } else if (kw == "basis") {
      if (toks.size() < 3) fail(kcol, "expected: basis ID RE,IM;...");
      s.kind = StatementKind::kBasis;
      s.id = toks[1].text;
      auto start = static_cast<std::size_t>(toks[1].col - 1) + toks[1].text.size();
      s.matrix = matrix(content.substr(start), static_cast<int>(start) + 1);
      bases_.insert(s.id);
    } else if (kw == "evolve1") {
      std::vector<Tok> head;
      std::string tail;
      int tcol = 0;
      if (!split_colon(content, head, tail, tcol)) fail(kcol, "expected: evolve1 T : MATRIX");
      arity(head, 2, "evolve1 T : MATRIX");
      s.kind = StatementKind::kEvolve1;
      s.time = number(head[1]);
      s.matrix = matrix(tail, tcol);
    } else if (kw == "evolveU") {
      std::vector<Tok> head;
      std::string tail;
      int tcol = 0;
      if (!split_colon(content, head, tail, tcol)) fail(kcol, "expected: evolveU T [in ID] : Li Lj E ; ...");
      if (head.size() != 2 && head.size() != 4) fail(kcol, "expected: evolveU T [in ID] : Li Lj E ; ...");
      s.kind = StatementKind::kEvolveU;
      s.time = number(head[1]);
      if (head.size() == 4) {
        if (head[2].text != "in") fail(head[2].col, "expected 'in'");
        if (!bases_.count(head[3].text)) fail(head[3].col, "unknown basis '" + head[3].text + "'");
        s.id = head[3].text;
      }
      std::size_t pos = 0;
      while (pos <= tail.size()) {
        std::size_t end = tail.find(';', pos);
        if (end == std::string::npos) end = tail.size();
        auto tt = split_ws(tail.substr(pos, end - pos), tcol + static_cast<int>(pos));
        if (tt.size() < 3) fail(tcol + static_cast<int>(pos), "interaction term needs two or more labels and an energy");
        DensityTerm term;
        std::vector<Tok> names(tt.begin(), tt.end() - 1);
        term.orbitals = labels(names, 0);
        term.energy = number(tt.back());
        s.terms.push_back(std::move(term));
        pos = end + 1;
      }
    } else if (kw == "measure") {
      if (toks.size() < 3) fail(kcol, "expected: measure occ|total|spin|basis ...");
      const std::string& mode = toks[1].text;
      if (mode == "occ" || mode == "total") {
        s.kind = mode == "occ" ? StatementKind::kMeasureOcc : StatementKind::kMeasureTotal;
        s.orbitals = labels(toks, 2);
      } else if (mode == "spin") {
        arity(toks, 5, "measure spin AXIS L_UP L_DN");
        s.kind = StatementKind::kMeasureSpin;
        check_axis(toks[2]);
        s.axis = toks[2].text;
        s.orbitals = labels(toks, 3);
      } else if (mode == "basis") {
        if (toks.size() < 4) fail(kcol, "expected: measure basis ID L1 ...");
        if (!bases_.count(toks[2].text)) fail(toks[2].col, "unknown basis '" + toks[2].text + "'");
        s.kind = StatementKind::kMeasureBasis;
        s.id = toks[2].text;
        s.orbitals = labels(toks, 3);
      } else {
        fail(toks[1].col, "unknown measurement '" + mode + "'");
      }
    } else if (kw == "select") {
      arity(toks, 2, "select INDEX");
      s.kind = StatementKind::kSelect;
      const auto& t = toks[1].text;
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || ptr != t.data() + t.size()) fail(toks[1].col, "select expects a branch index");
      s.index = v;
    } else if (kw == "assert") {
      if (toks.size() < 2) fail(kcol, "expected: assert KIND ...");
      const std::string& what = toks[1].text;
      if (what == "particle_entropy" || what == "geometric") {
        arity(toks, 4, "assert " + what + " VAL TOL");
        s.kind = what == "geometric" ? StatementKind::kAssertGeometric : StatementKind::kAssertParticleEntropy;
        s.expected = number(toks[2]);
        s.tol = tolerance(toks[3]);
      } else if (what == "mode_entropy") {
        arity(toks, 5, "assert mode_entropy L1,... VAL TOL");
        s.kind = StatementKind::kAssertModeEntropy;
        std::vector<Tok> names;
        const auto& list = toks[2].text;
        std::size_t pos = 0;
        while (pos <= list.size()) {
          std::size_t end = list.find(',', pos);
          if (end == std::string::npos) end = list.size();
          names.push_back({list.substr(pos, end - pos), toks[2].col + static_cast<int>(pos)});
          pos = end + 1;
        }
        s.orbitals = labels(names, 0);
        s.expected = number(toks[3]);
        s.tol = tolerance(toks[4]);
      } else if (what == "prob") {
        arity(toks, 5, "assert prob PATTERN VAL TOL");
        s.kind = StatementKind::kAssertProb;
        s.pattern = toks[2].text;
        std::size_t pos = 0;
        while (pos <= s.pattern.size()) {
          std::size_t end = s.pattern.find(',', pos);
          if (end == std::string::npos) end = s.pattern.size();
          std::string pair = s.pattern.substr(pos, end - pos);
          auto eq = pair.find('=');
          if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
            fail(toks[2].col + static_cast<int>(pos), "pattern entries are label=value");
          }
          pos = end + 1;
        }
        s.expected = number(toks[3]);
        s.tol = tolerance(toks[4]);
      } else if (what == "fidelity") {
        arity(toks, 10, "assert fidelity L_UP L_DN ARE AIM BRE BIM VAL TOL");
        s.kind = StatementKind::kAssertFidelity;
        std::vector<Tok> pair(toks.begin() + 2, toks.begin() + 4);
        s.orbitals = labels(pair, 0);
        s.a = Complex(number(toks[4]), number(toks[5]));
        s.b = Complex(number(toks[6]), number(toks[7]));
        s.expected = number(toks[8]);
        s.tol = tolerance(toks[9]);
      } else {
        fail(toks[1].col, "unknown assertion '" + what + "'");
      }
    } else {
      fail(kcol, "unknown keyword '" + kw + "'");
    }
    return s;
  }

  const std::string& text_;
  int line_ = 0;
  Scenario out_;
  std::map<std::string, std::size_t> index_;
  std::set<std::string> bases_;
  bool filled_ = false;
  bool any_term_ = false;
  bool started_ = false;
};

std::string matrix_text(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i || j) out += "; ";
      out += fmt(m(i, j).real()) + "," + fmt(m(i, j).imag());
    }
  }
  return out;
}

}  // namespace

bool Statement::operator==(const Statement& o) const {
  bool terms_equal = terms.size() == o.terms.size();
  for (std::size_t i = 0; terms_equal && i < terms.size(); ++i) {
    terms_equal = terms[i].orbitals == o.terms[i].orbitals && terms[i].energy == o.terms[i].energy;
  }
  return kind == o.kind && line == o.line && coeff == o.coeff && orbitals == o.orbitals && axis == o.axis &&
         angle == o.angle && matrices_equal(matrix, o.matrix) && id == o.id && time == o.time && terms_equal &&
         index == o.index && expected == o.expected && tol == o.tol && pattern == o.pattern && a == o.a && b == o.b;
}

bool Scenario::operator==(const Scenario& o) const {
  return name == o.name && labels == o.labels && statements == o.statements;
}

Scenario parse_scenario(const std::string& text) { return Parser(text).run(); }

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_statement(const Scenario& sc, const Statement& s) {
  auto names = [&](const std::vector<std::size_t>& idx, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i) out += sep;
      out += sc.labels.at(idx[i]);
    }
    return out;
  };
  switch (s.kind) {
    case StatementKind::kFilled:
      return "filled";
    case StatementKind::kTerm:
    case StatementKind::kHole:
      return std::string(s.kind == StatementKind::kTerm ? "term " : "hole ") + fmt(s.coeff.real()) + " " +
             fmt(s.coeff.imag()) + " : " + names(s.orbitals, " ");
    case StatementKind::kRotate:
      return "rotate " + names(s.orbitals, " ") + " " + s.axis + " " + fmt(s.angle);
    case StatementKind::kUnitary:
      return "unitary " + matrix_text(s.matrix);
    case StatementKind::kBasis:
      return "basis " + s.id + " " + matrix_text(s.matrix);
    case StatementKind::kEvolve1:
      return "evolve1 " + fmt(s.time) + " : " + matrix_text(s.matrix);
    case StatementKind::kEvolveU: {
      std::string out = "evolveU " + fmt(s.time) + (s.id.empty() ? "" : " in " + s.id) + " :";
      for (std::size_t i = 0; i < s.terms.size(); ++i) {
        out += (i ? " ; " : " ") + names(s.terms[i].orbitals, " ") + " " + fmt(s.terms[i].energy);
      }
      return out;
    }
    case StatementKind::kMeasureOcc:
      return "measure occ " + names(s.orbitals, " ");
    case StatementKind::kMeasureTotal:
      return "measure total " + names(s.orbitals, " ");
    case StatementKind::kMeasureSpin:
      return "measure spin " + s.axis + " " + names(s.orbitals, " ");
    case StatementKind::kMeasureBasis:
      return "measure basis " + s.id + " " + names(s.orbitals, " ");
    case StatementKind::kSelect:
      return "select " + std::to_string(s.index);
    case StatementKind::kAssertParticleEntropy:
      return "assert particle_entropy " + fmt(s.expected) + " " + fmt(s.tol);
    case StatementKind::kAssertGeometric:
      return "assert geometric " + fmt(s.expected) + " " + fmt(s.tol);
    case StatementKind::kAssertModeEntropy:
      return "assert mode_entropy " + names(s.orbitals, ",") + " " + fmt(s.expected) + " " + fmt(s.tol);
    case StatementKind::kAssertProb:
      return "assert prob " + s.pattern + " " + fmt(s.expected) + " " + fmt(s.tol);
    case StatementKind::kAssertFidelity:
      return "assert fidelity " + names(s.orbitals, " ") + " " + fmt(s.a.real()) + " " + fmt(s.a.imag()) + " " +
             fmt(s.b.real()) + " " + fmt(s.b.imag()) + " " + fmt(s.expected) + " " + fmt(s.tol);
  }
  return "";
}

std::string serialize_scenario(const Scenario& sc) {
  // Line numbers are kept by padding with blank lines.
  std::string out = "scenario " + sc.name + "\norbitals";
  for (const auto& l : sc.labels) out += " " + l;
  out += "\n";
  int line = 2;
  for (const auto& s : sc.statements) {
    while (line + 1 < s.line) {
      out += "\n";
      ++line;
    }
    out += serialize_statement(sc, s) + "\n";
    ++line;
  }
  return out;
}

}  // namespace fermitele
