#include "decpomdp/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "decpomdp/model.hpp"

namespace decpomdp {

namespace {

constexpr double kRenormSkip = 64 * std::numeric_limits<double>::epsilon();

struct Line {
  int number = 0;
  std::string text;
};

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

// Comment-stripped, trimmed, non-blank lines with their 1-based numbers.
std::vector<Line> logical_lines(const std::string& text) {
  std::vector<Line> out;
  int number = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (!line.empty()) out.push_back({number, std::move(line)});
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return out;
}

// Splits "T: a b : 0 : 1 : 0.5" into {"T", "a b", "0", "1", "0.5"}.
std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t colon = line.find(':', pos);
    if (colon == std::string::npos) {
      out.push_back(trim(line.substr(pos)));
      break;
    }
    out.push_back(trim(line.substr(pos, colon - pos)));
    pos = colon + 1;
  }
  return out;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

double parse_number(const std::string& token, int line, const char* what) {
  double v = 0.0;
  const char* begin = token.c_str();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw ParseError(line, std::string("expected a ") + what + ", got '" + token + "'");
  return v;
}

int parse_int(const std::string& token, int line, const char* what) {
  int v = 0;
  const char* begin = token.c_str();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw ParseError(line, std::string("expected an integer ") + what + ", got '" + token + "'");
  return v;
}

// Label, 0-based numeric index, or (when allow_all) '*'. Returns -1 for '*'.
int resolve_index(const std::string& token, const std::vector<std::string>& labels, int line,
                  const char* what, bool allow_all = true) {
  if (token == "*") {
    if (allow_all) return -1;
    throw ParseError(line, std::string("'*' is not allowed for ") + what + " here");
  }
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == token) return static_cast<int>(i);
  if (all_digits(token)) {
    int idx = parse_int(token, line, what);
    if (idx < 0 || idx >= static_cast<int>(labels.size()))
      throw ParseError(line, std::string(what) + " index " + token + " out of range");
    return idx;
  }
  throw ParseError(line, std::string("unknown ") + what + " '" + token + "'");
}

std::string format_double(double v, int precision = 17) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, precision);
  return std::string(buf, result.ptr);
}

std::string format_shortest(double v) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, result.ptr);
}

// ---------------------------------------------------------------------------
// Model parsing

class ModelParser {
 public:
  explicit ModelParser(const std::string& text) : lines_(logical_lines(text)) {}

  DecPomdpModel parse() {
    parse_header();
    parse_body();
    finalize();
    return std::move(model_);
  }

 private:
  const Line& need_line(const char* what) {
    if (cursor_ >= lines_.size()) throw ParseError(last_line(), std::string("expected ") + what);
    return lines_[cursor_];
  }

  int last_line() const { return lines_.empty() ? 0 : lines_.back().number; }

  // "key: value" with the value either inline or on the following line.
  std::string header_value(const char* key, bool allow_next_line) {
    const Line& line = need_line((std::string(key) + ":").c_str());
    auto f = fields_of(line.text);
    if (f[0] != key)
      throw ParseError(line.number,
                       std::string("expected '") + key + ":', got '" + f[0] + "'");
    if (f.size() != 2) throw ParseError(line.number, std::string("malformed '") + key + "' line");
    line_ = line.number;
    ++cursor_;
    if (!f[1].empty()) return f[1];
    if (!allow_next_line)
      throw ParseError(line.number, std::string("missing value for '") + key + "'");
    const Line& value = need_line((std::string(key) + " value").c_str());
    line_ = value.number;
    ++cursor_;
    return value.text;
  }

  std::vector<std::string> labelled_set(const std::string& value, const char* prefix, int line) {
    auto toks = tokens_of(value);
    if (toks.empty()) throw ParseError(line, "empty set");
    if (toks.size() == 1 && all_digits(toks[0])) {
      int n = parse_int(toks[0], line, "set size");
      if (n < 1 || n > 4096) throw ParseError(line, "set size out of range");
      std::vector<std::string> labels(n);
      for (int i = 0; i < n; ++i) labels[i] = prefix + std::to_string(i);
      return labels;
    }
    return toks;
  }

  bool next_key_is(const char* key) const {
    if (cursor_ >= lines_.size()) return false;
    auto f = fields_of(lines_[cursor_].text);
    return f[0] == key;
  }

  void parse_start() {
    const std::string start = header_value("start", true);
    model_.initial_state.assign(nx_, 0.0);
    if (start == "uniform") {
      for (double& p : model_.initial_state) p = 1.0 / nx_;
      return;
    }
    auto toks = tokens_of(start);
    if (static_cast<int>(toks.size()) != nx_)
      throw ParseError(line_, "start distribution needs " + std::to_string(nx_) + " entries");
    for (int i = 0; i < nx_; ++i) {
      model_.initial_state[i] = parse_number(toks[i], line_, "probability");
      if (model_.initial_state[i] < 0.0) throw ParseError(line_, "negative start probability");
    }
    normalize_or_fail(model_.initial_state, "start distribution", line_);
  }

  void parse_header() {
    model_.num_agents = parse_int(header_value("agents", false), line_, "agent count");
    if (model_.num_agents < 1 || model_.num_agents > 16)
      throw ParseError(line_, "agent count out of range");

    model_.discount = parse_number(header_value("discount", false), line_, "discount");

    if (const std::string v = header_value("values", false); v != "reward")
      throw ParseError(line_, "only 'values: reward' is supported, got '" + v + "'");

    model_.states = labelled_set(header_value("states", true), "s", line_);
    nx_ = model_.num_states();

    // Published files place `start:` either directly after `states:` or
    // after `observations:`; both are accepted.
    bool have_start = false;
    if (next_key_is("start")) {
      parse_start();
      have_start = true;
    }

    {
      const Line& line = need_line("'actions:'");
      auto f = fields_of(line.text);
      if (f[0] != "actions" || f.size() != 2 || !f[1].empty())
        throw ParseError(line.number, "expected 'actions:' followed by one line per agent");
      ++cursor_;
      for (int i = 0; i < model_.num_agents; ++i) {
        const Line& row = need_line("per-agent action labels");
        model_.actions.push_back(labelled_set(row.text, "a", row.number));
        ++cursor_;
      }
    }
    {
      const Line& line = need_line("'observations:'");
      auto f = fields_of(line.text);
      if (f[0] != "observations" || f.size() != 2 || !f[1].empty())
        throw ParseError(line.number, "expected 'observations:' followed by one line per agent");
      ++cursor_;
      for (int i = 0; i < model_.num_agents; ++i) {
        const Line& row = need_line("per-agent observation labels");
        model_.observations.push_back(labelled_set(row.text, "o", row.number));
        ++cursor_;
      }
    }

    // Joint sizes are validated in floating point before any JointSpace is
    // built, so pathological headers cannot overflow the stride arithmetic.
    double na_d = 1.0, ny_d = 1.0;
    for (const auto& a : model_.actions) na_d *= static_cast<double>(a.size());
    for (const auto& o : model_.observations) ny_d *= static_cast<double>(o.size());
    if (na_d > 1e6 || ny_d > 1e6 || nx_ * na_d * nx_ > 1e7 || nx_ * na_d * ny_d > 1e7)
      throw ParseError(line_, "model dimensions too large");
    action_space_ = model_.action_space();
    observation_space_ = model_.observation_space();
    na_ = action_space_.size();
    ny_ = observation_space_.size();

    if (!have_start) parse_start();

    model_.transition.assign(static_cast<size_t>(nx_) * na_ * nx_, 0.0);
    model_.observation_fn.assign(static_cast<size_t>(nx_) * na_ * ny_, 0.0);
    model_.reward.assign(static_cast<size_t>(nx_) * na_, 0.0);
    transition_set_.assign(model_.transition.size(), 0);
    observation_set_.assign(model_.observation_fn.size(), 0);
    reward_set_.assign(model_.reward.size(), 0);
  }

  // Joint indices matching a token list: one '*' for the whole tuple, or one
  // token per agent with per-agent wildcards.
  std::vector<int> joint_indices(const std::string& field, const JointSpace& space,
                                 const std::vector<std::vector<std::string>>& labels, int line,
                                 const char* what) {
    auto toks = tokens_of(field);
    std::vector<int> out;
    if (toks.size() == 1 && toks[0] == "*") {
      out.resize(space.size());
      for (int i = 0; i < space.size(); ++i) out[i] = i;
      return out;
    }
    if (static_cast<int>(toks.size()) != model_.num_agents)
      throw ParseError(line, std::string("expected ") + std::to_string(model_.num_agents) + " " +
                                 what + " tokens or a single '*'");
    std::vector<std::vector<int>> per_agent(model_.num_agents);
    for (int i = 0; i < model_.num_agents; ++i) {
      int idx = resolve_index(toks[i], labels[i], line, what);
      if (idx < 0) {
        per_agent[i].resize(labels[i].size());
        for (size_t k = 0; k < labels[i].size(); ++k) per_agent[i][k] = static_cast<int>(k);
      } else {
        per_agent[i] = {idx};
      }
    }
    std::vector<int> digits(model_.num_agents, 0);
    std::vector<int> pick(model_.num_agents, 0);
    while (true) {
      for (int i = 0; i < model_.num_agents; ++i) pick[i] = per_agent[i][digits[i]];
      out.push_back(space.flatten(pick));
      int i = model_.num_agents - 1;
      while (i >= 0 && ++digits[i] == static_cast<int>(per_agent[i].size())) digits[i--] = 0;
      if (i < 0) break;
    }
    return out;
  }

  std::vector<int> state_indices(const std::string& field, int line, const char* what) {
    auto toks = tokens_of(field);
    if (toks.size() != 1)
      throw ParseError(line, std::string("expected one ") + what + " token");
    int idx = resolve_index(toks[0], model_.states, line, what);
    if (idx >= 0) return {idx};
    std::vector<int> all(nx_);
    for (int i = 0; i < nx_; ++i) all[i] = i;
    return all;
  }

  void assign_cell(std::vector<double>& table, std::vector<uint8_t>& set, size_t idx, double v,
                   int line, const char* what) {
    if (set[idx]) throw ParseError(line, std::string("duplicate assignment to ") + what);
    set[idx] = 1;
    table[idx] = v;
  }

  void parse_body() {
    while (cursor_ < lines_.size()) {
      const Line& line = lines_[cursor_++];
      auto f = fields_of(line.text);
      if (f[0] == "T")
        parse_transition(f, line.number);
      else if (f[0] == "O")
        parse_observation(f, line.number);
      else if (f[0] == "R")
        parse_reward(f, line.number);
      else
        throw ParseError(line.number, "unknown keyword '" + f[0] + "'");
    }
  }

  // Consumes the next line as data for a multi-line matrix/row form.
  const Line& take_line(const char* what) {
    const Line& line = need_line(what);
    ++cursor_;
    return line;
  }

  std::vector<double> parse_probability_row(const std::string& text, int count, int line,
                                            const char* what) {
    auto toks = tokens_of(text);
    if (static_cast<int>(toks.size()) != count)
      throw ParseError(line, std::string(what) + " needs " + std::to_string(count) + " entries");
    std::vector<double> row(count);
    for (int i = 0; i < count; ++i) {
      row[i] = parse_number(toks[i], line, "probability");
      if (row[i] < 0.0) throw ParseError(line, "negative probability");
    }
    return row;
  }

  void assign_transition_row(int x, int a, std::span<const double> row, int line) {
    for (int xn = 0; xn < nx_; ++xn)
      assign_cell(model_.transition, transition_set_, (static_cast<size_t>(x) * na_ + a) * nx_ + xn,
                  row[xn], line, "a transition cell");
  }

  void assign_observation_row(int xn, int a, std::span<const double> row, int line) {
    for (int y = 0; y < ny_; ++y)
      assign_cell(model_.observation_fn, observation_set_,
                  (static_cast<size_t>(xn) * na_ + a) * ny_ + y, row[y], line,
                  "an observation cell");
  }

  std::vector<int> all_states() const {
    std::vector<int> all(nx_);
    for (int i = 0; i < nx_; ++i) all[i] = i;
    return all;
  }

  // Whole-table forms for one or more joint actions: 'uniform', 'identity'
  // (transitions only), or nx lines each holding one row.
  void parse_transition_table(const std::vector<int>& acts, const std::string& keyword,
                              int line) {
    if (keyword == "uniform") {
      const std::vector<double> row(nx_, 1.0 / nx_);
      for (int a : acts)
        for (int x : all_states()) assign_transition_row(x, a, row, line);
      return;
    }
    if (keyword == "identity") {
      for (int a : acts)
        for (int x : all_states()) {
          std::vector<double> row(nx_, 0.0);
          row[x] = 1.0;
          assign_transition_row(x, a, row, line);
        }
      return;
    }
    // First matrix row is in `keyword` only when it came from an inline
    // field; an empty keyword means all rows follow on their own lines.
    int x = 0;
    if (!keyword.empty()) {
      const auto row = parse_probability_row(keyword, nx_, line, "transition row");
      for (int a : acts) assign_transition_row(x, a, row, line);
      ++x;
    }
    for (; x < nx_; ++x) {
      const Line& data = take_line("transition matrix row");
      const auto row = parse_probability_row(data.text, nx_, data.number, "transition row");
      for (int a : acts) assign_transition_row(x, a, row, data.number);
    }
  }

  void parse_observation_table(const std::vector<int>& acts, const std::string& keyword,
                               int line) {
    if (keyword == "uniform") {
      const std::vector<double> row(ny_, 1.0 / ny_);
      for (int a : acts)
        for (int xn : all_states()) assign_observation_row(xn, a, row, line);
      return;
    }
    int xn = 0;
    if (!keyword.empty()) {
      const auto row = parse_probability_row(keyword, ny_, line, "observation row");
      for (int a : acts) assign_observation_row(xn, a, row, line);
      ++xn;
    }
    for (; xn < nx_; ++xn) {
      const Line& data = take_line("observation matrix row");
      const auto row = parse_probability_row(data.text, ny_, data.number, "observation row");
      for (int a : acts) assign_observation_row(xn, a, row, data.number);
    }
  }

  void parse_transition(const std::vector<std::string>& f, int line) {
    if (f.size() < 3 || f.size() > 5) throw ParseError(line, "malformed T line");
    auto acts = joint_indices(f[1], action_space_, model_.actions, line, "action");
    if (f.size() == 3) {
      // 'T: <a> : <uniform|identity|matrix-row>' or 'T: <a> :' with the
      // table on the following lines.
      std::string keyword = f[2];
      if (keyword.empty()) {
        const Line& data = take_line("transition table");
        keyword = data.text;
        line = data.number;
      }
      parse_transition_table(acts, keyword, line);
      return;
    }
    auto xs = state_indices(f[2], line, "state");
    if (f.size() == 4) {
      if (f[3] == "uniform") {
        const std::vector<double> row(nx_, 1.0 / nx_);
        for (int a : acts)
          for (int x : xs) assign_transition_row(x, a, row, line);
        return;
      }
      std::string text = f[3];
      if (text.empty()) {
        const Line& data = take_line("transition row");
        text = data.text;
        line = data.number;
      }
      const auto row = parse_probability_row(text, nx_, line, "transition row");
      for (int a : acts)
        for (int x : xs) assign_transition_row(x, a, row, line);
      return;
    }
    auto dests = state_indices(f[3], line, "state");
    double p = parse_number(f[4], line, "probability");
    if (p < 0.0) throw ParseError(line, "negative probability");
    for (int a : acts)
      for (int x : xs)
        for (int xn : dests)
          assign_cell(model_.transition, transition_set_,
                      (static_cast<size_t>(x) * na_ + a) * nx_ + xn, p, line, "a transition cell");
  }

  void parse_observation(const std::vector<std::string>& f, int line) {
    if (f.size() < 3 || f.size() > 5) throw ParseError(line, "malformed O line");
    auto acts = joint_indices(f[1], action_space_, model_.actions, line, "action");
    if (f.size() == 3) {
      std::string keyword = f[2];
      if (keyword.empty()) {
        const Line& data = take_line("observation table");
        keyword = data.text;
        line = data.number;
      }
      parse_observation_table(acts, keyword, line);
      return;
    }
    auto xns = state_indices(f[2], line, "state");
    if (f.size() == 4) {
      if (f[3] == "uniform") {
        const std::vector<double> row(ny_, 1.0 / ny_);
        for (int a : acts)
          for (int xn : xns) assign_observation_row(xn, a, row, line);
        return;
      }
      std::string text = f[3];
      if (text.empty()) {
        const Line& data = take_line("observation row");
        text = data.text;
        line = data.number;
      }
      const auto row = parse_probability_row(text, ny_, line, "observation row");
      for (int a : acts)
        for (int xn : xns) assign_observation_row(xn, a, row, line);
      return;
    }
    auto obs = joint_indices(f[3], observation_space_, model_.observations, line, "observation");
    double p = parse_number(f[4], line, "probability");
    if (p < 0.0) throw ParseError(line, "negative probability");
    for (int a : acts)
      for (int xn : xns)
        for (int y : obs)
          assign_cell(model_.observation_fn, observation_set_,
                      (static_cast<size_t>(xn) * na_ + a) * ny_ + y, p, line,
                      "an observation cell");
  }

  void parse_reward(const std::vector<std::string>& f, int line) {
    if (f.size() != 4 && f.size() != 6) throw ParseError(line, "malformed R line");
    auto acts = joint_indices(f[1], action_space_, model_.actions, line, "action");
    auto xs = state_indices(f[2], line, "state");
    if (f.size() == 6) {
      for (const std::string& t : tokens_of(f[3]))
        if (t != "*")
          throw ParseError(line,
                           "rewards may not depend on the next state; only '*' is accepted here");
      for (const std::string& t : tokens_of(f[4]))
        if (t != "*")
          throw ParseError(line,
                           "rewards may not depend on observations; only '*' is accepted here");
    }
    double v = parse_number(f.back(), line, "reward");
    for (int a : acts)
      for (int x : xs)
        assign_cell(model_.reward, reward_set_, static_cast<size_t>(x) * na_ + a, v, line,
                    "a reward cell");
  }

  void normalize_or_fail(std::span<double> row, const std::string& what, int line) {
    double sum = 0.0;
    for (double p : row) sum += p;
    if (std::fabs(sum - 1.0) > kRowSumTolerance)
      throw ParseError(line, what + " is incomplete or non-stochastic (sum " +
                                 format_shortest(sum) + ")");
    if (std::fabs(sum - 1.0) > kRenormSkip)
      for (double& p : row) p /= sum;
  }

  std::string action_label(int a) const {
    std::string out;
    for (int i = 0; i < model_.num_agents; ++i) {
      if (i) out += ' ';
      out += model_.actions[i][action_space_.component(a, i)];
    }
    return out;
  }

  void finalize() {
    for (int x = 0; x < nx_; ++x)
      for (int a = 0; a < na_; ++a)
        normalize_or_fail(
            std::span<double>(&model_.transition[(static_cast<size_t>(x) * na_ + a) * nx_],
                              static_cast<size_t>(nx_)),
            "transition row (a=" + action_label(a) + ", x=" + model_.states[x] + ")", last_line());
    for (int xn = 0; xn < nx_; ++xn)
      for (int a = 0; a < na_; ++a)
        normalize_or_fail(
            std::span<double>(&model_.observation_fn[(static_cast<size_t>(xn) * na_ + a) * ny_],
                              static_cast<size_t>(ny_)),
            "observation row (a=" + action_label(a) + ", x'=" + model_.states[xn] + ")",
            last_line());
  }

  std::vector<Line> lines_;
  size_t cursor_ = 0;
  int line_ = 0;
  DecPomdpModel model_;
  JointSpace action_space_, observation_space_;
  int nx_ = 0, na_ = 0, ny_ = 0;
  std::vector<uint8_t> transition_set_, observation_set_, reward_set_;
};

}  // namespace

DecPomdpModel parse_model(const std::string& text, const std::string& source_name) {
  (void)source_name;  // callers prefix diagnostics with the source themselves
  return ModelParser(text).parse();
}

ModelDocument parse_model_document(std::string text, std::string source_name) {
  ModelDocument doc;
  doc.model = ModelParser(text).parse();
  doc.text = std::move(text);
  doc.source_name = std::move(source_name);
  const auto issues = validate_model(doc.model);
  if (!issues.empty()) throw ParseError(0, issues.front());
  return doc;
}

std::string serialize_model(const DecPomdpModel& model) {
  const JointSpace as = model.action_space();
  const JointSpace ys = model.observation_space();
  const int nx = model.num_states(), na = as.size(), ny = ys.size();

  std::string out;
  out += "agents: " + std::to_string(model.num_agents) + "\n";
  out += "discount: " + format_double(model.discount) + "\n";
  out += "values: reward\n";
  out += "states:";
  for (const auto& s : model.states) out += " " + s;
  out += "\nactions:\n";
  for (const auto& agent : model.actions) {
    for (size_t i = 0; i < agent.size(); ++i) out += (i ? " " : "") + agent[i];
    out += "\n";
  }
  out += "observations:\n";
  for (const auto& agent : model.observations) {
    for (size_t i = 0; i < agent.size(); ++i) out += (i ? " " : "") + agent[i];
    out += "\n";
  }
  out += "start:";
  for (double p : model.initial_state) out += " " + format_double(p);
  out += "\n";

  auto joint_label = [](const JointSpace& space, const std::vector<std::vector<std::string>>& sets,
                        int flat) {
    std::string s;
    for (int i = 0; i < space.num_components(); ++i) {
      if (i) s += ' ';
      s += sets[i][space.component(flat, i)];
    }
    return s;
  };

  for (int a = 0; a < na; ++a)
    for (int x = 0; x < nx; ++x)
      for (int xn = 0; xn < nx; ++xn) {
        const double p = model.transition_at(x, a, xn);
        if (p != 0.0)
          out += "T: " + joint_label(as, model.actions, a) + " : " + model.states[x] + " : " +
                 model.states[xn] + " : " + format_double(p) + "\n";
      }
  for (int a = 0; a < na; ++a)
    for (int xn = 0; xn < nx; ++xn)
      for (int y = 0; y < ny; ++y) {
        const double p = model.observation_at(xn, a, y);
        if (p != 0.0)
          out += "O: " + joint_label(as, model.actions, a) + " : " + model.states[xn] + " : " +
                 joint_label(ys, model.observations, y) + " : " + format_double(p) + "\n";
      }
  for (int a = 0; a < na; ++a)
    for (int x = 0; x < nx; ++x) {
      const double r = model.reward_at(x, a);
      if (r != 0.0)
        out += "R: " + joint_label(as, model.actions, a) + " : " + model.states[x] + " : " +
               format_double(r) + "\n";
    }
  return out;
}

std::string serialize_policy(const JointPolicy& policy) {
  std::string out;
  const int n = policy.num_agents();
  out += "agents: " + std::to_string(n) + "\n";
  out += "memory:";
  for (int m : policy.memory_sizes) out += " " + std::to_string(m);
  out += "\nactions:";
  for (int i = 0; i < n; ++i)
    out += " " + std::to_string(policy.pi[i].size() / policy.memory_sizes[i]);
  out += "\nobservations:";
  for (int i = 0; i < n; ++i)
    out += " " + std::to_string(policy.lambda[i].size() /
                                (static_cast<size_t>(policy.memory_sizes[i]) *
                                 policy.memory_sizes[i]));
  out += "\n";
  for (int i = 0; i < n; ++i) {
    out += "nu: " + std::to_string(i) + " :";
    for (double p : policy.nu[i]) out += " " + format_double(p);
    out += "\n";
  }
  for (int i = 0; i < n; ++i) {
    const int nz = policy.memory_sizes[i];
    const int nai = static_cast<int>(policy.pi[i].size()) / nz;
    for (int z = 0; z < nz; ++z) {
      out += "pi: " + std::to_string(i) + " : " + std::to_string(z) + " :";
      for (int a = 0; a < nai; ++a)
        out += " " + format_double(policy.pi[i][static_cast<size_t>(z) * nai + a]);
      out += "\n";
    }
  }
  for (int i = 0; i < n; ++i) {
    const int nz = policy.memory_sizes[i];
    const int nyi = static_cast<int>(policy.lambda[i].size()) / (static_cast<size_t>(nz) * nz);
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < nyi; ++y) {
        out += "lambda: " + std::to_string(i) + " : " + std::to_string(z) + " : " +
               std::to_string(y) + " :";
        for (int zn = 0; zn < nz; ++zn)
          out += " " + format_double(policy.lambda[i][(static_cast<size_t>(z) * nyi + y) * nz + zn]);
        out += "\n";
      }
  }
  return out;
}

JointPolicy parse_policy(const std::string& text) {
  const std::vector<Line> lines = logical_lines(text);
  if (lines.empty()) throw ParseError(0, "empty policy document");
  size_t cursor = 0;
  auto header = [&](const char* key) -> std::pair<std::string, int> {
    if (cursor >= lines.size())
      throw ParseError(lines.back().number, std::string("expected '") + key + ":'");
    auto f = fields_of(lines[cursor].text);
    if (f.size() != 2 || f[0] != key)
      throw ParseError(lines[cursor].number, std::string("expected '") + key + ": ...'");
    int number = lines[cursor].number;
    ++cursor;
    return {f[1], number};
  };

  auto [agents_str, agents_line] = header("agents");
  const int n = parse_int(agents_str, agents_line, "agent count");
  if (n < 1 || n > 16) throw ParseError(agents_line, "agent count out of range");

  auto read_sizes = [&](const char* key) {
    auto [value, line] = header(key);
    auto toks = tokens_of(value);
    if (static_cast<int>(toks.size()) != n)
      throw ParseError(line, std::string("'") + key + "' needs one size per agent");
    std::vector<int> out(n);
    for (int i = 0; i < n; ++i) {
      out[i] = parse_int(toks[i], line, "size");
      if (out[i] < 1 || out[i] > 4096) throw ParseError(line, "size out of range");
    }
    return out;
  };
  const std::vector<int> memory = read_sizes("memory");
  const std::vector<int> n_actions = read_sizes("actions");
  const std::vector<int> n_observations = read_sizes("observations");

  JointPolicy policy;
  policy.memory_sizes = memory;
  policy.pi.resize(n);
  policy.lambda.resize(n);
  policy.nu.resize(n);
  std::vector<std::vector<uint8_t>> pi_set(n), lambda_set(n), nu_set(n);
  for (int i = 0; i < n; ++i) {
    policy.pi[i].assign(static_cast<size_t>(memory[i]) * n_actions[i], 0.0);
    policy.lambda[i].assign(static_cast<size_t>(memory[i]) * n_observations[i] * memory[i], 0.0);
    policy.nu[i].assign(memory[i], 0.0);
    pi_set[i].assign(memory[i], 0);
    lambda_set[i].assign(static_cast<size_t>(memory[i]) * n_observations[i], 0);
    nu_set[i].assign(1, 0);
  }

  auto agent_of = [&](const std::string& field, int line) {
    int i = parse_int(field, line, "agent index");
    if (i < 0 || i >= n) throw ParseError(line, "agent index out of range");
    return i;
  };
  auto row_values = [&](const std::string& field, int count, int line, std::span<double> out) {
    auto toks = tokens_of(field);
    if (static_cast<int>(toks.size()) != count)
      throw ParseError(line, "expected " + std::to_string(count) + " probabilities");
    double sum = 0.0;
    for (int k = 0; k < count; ++k) {
      out[k] = parse_number(toks[k], line, "probability");
      if (out[k] < 0.0) throw ParseError(line, "negative probability");
      sum += out[k];
    }
    if (std::fabs(sum - 1.0) > kRowSumTolerance)
      throw ParseError(line, "row is not stochastic (sum " + format_shortest(sum) + ")");
  };

  for (; cursor < lines.size(); ++cursor) {
    const Line& line = lines[cursor];
    auto f = fields_of(line.text);
    if (f[0] == "nu") {
      if (f.size() != 3) throw ParseError(line.number, "malformed nu line");
      int i = agent_of(f[1], line.number);
      if (nu_set[i][0]) throw ParseError(line.number, "duplicate nu row");
      nu_set[i][0] = 1;
      row_values(f[2], memory[i], line.number, policy.nu[i]);
    } else if (f[0] == "pi") {
      if (f.size() != 4) throw ParseError(line.number, "malformed pi line");
      int i = agent_of(f[1], line.number);
      int z = parse_int(f[2], line.number, "memory index");
      if (z < 0 || z >= memory[i]) throw ParseError(line.number, "memory index out of range");
      if (pi_set[i][z]) throw ParseError(line.number, "duplicate pi row");
      pi_set[i][z] = 1;
      row_values(f[3], n_actions[i], line.number,
                 std::span<double>(&policy.pi[i][static_cast<size_t>(z) * n_actions[i]],
                                   static_cast<size_t>(n_actions[i])));
    } else if (f[0] == "lambda") {
      if (f.size() != 5) throw ParseError(line.number, "malformed lambda line");
      int i = agent_of(f[1], line.number);
      int z = parse_int(f[2], line.number, "memory index");
      int y = parse_int(f[3], line.number, "observation index");
      if (z < 0 || z >= memory[i]) throw ParseError(line.number, "memory index out of range");
      if (y < 0 || y >= n_observations[i])
        throw ParseError(line.number, "observation index out of range");
      if (lambda_set[i][static_cast<size_t>(z) * n_observations[i] + y])
        throw ParseError(line.number, "duplicate lambda row");
      lambda_set[i][static_cast<size_t>(z) * n_observations[i] + y] = 1;
      row_values(f[4], memory[i], line.number,
                 std::span<double>(&policy.lambda[i][(static_cast<size_t>(z) * n_observations[i] +
                                                      y) *
                                                     memory[i]],
                                   static_cast<size_t>(memory[i])));
    } else {
      throw ParseError(line.number, "unknown keyword '" + f[0] + "'");
    }
  }

  const int last = lines.back().number;
  for (int i = 0; i < n; ++i) {
    if (!nu_set[i][0]) throw ParseError(last, "missing nu row for agent " + std::to_string(i));
    for (int z = 0; z < memory[i]; ++z)
      if (!pi_set[i][z])
        throw ParseError(last, "missing pi row (agent " + std::to_string(i) + ", z=" +
                                   std::to_string(z) + ")");
    for (int z = 0; z < memory[i]; ++z)
      for (int y = 0; y < n_observations[i]; ++y)
        if (!lambda_set[i][static_cast<size_t>(z) * n_observations[i] + y])
          throw ParseError(last, "missing lambda row (agent " + std::to_string(i) + ", z=" +
                                     std::to_string(z) + ", y'=" + std::to_string(y) + ")");
  }
  return policy;
}

std::string write_trace_csv(std::span<const IterationTrace> trace) {
  std::string out = "iter,J,inner_iters,elapsed_ms,algo\n";
  for (const IterationTrace& row : trace) {
    out += std::to_string(row.iteration);
    out += ',';
    out += format_shortest(row.expected_return);
    out += ',';
    out += std::to_string(row.inner_iters);
    out += ',';
    out += format_shortest(row.elapsed_ms());
    out += ',';
    out += algorithm_name(row.algorithm);
    out += '\n';
  }
  return out;
}

}  // namespace decpomdp
