#include "netplan/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace netplan {

int Network::add_node(std::string id) {
  if (node_index_.count(id)) throw std::invalid_argument("duplicate node id '" + id + "'");
  nodes_.push_back(id);
  incoming_.emplace_back();
  outgoing_.emplace_back();
  node_index_.emplace(std::move(id), num_nodes() - 1);
  return num_nodes() - 1;
}

int Network::add_arc(std::string id, int tail, int head, double base_capacity,
                     double expansion_cost) {
  if (tail < 0 || tail >= num_nodes() || head < 0 || head >= num_nodes())
    throw std::invalid_argument("arc '" + id + "' references unknown node");
  if (tail == head) throw std::invalid_argument("arc '" + id + "' is a self-loop");
  if (base_capacity < 0) throw std::invalid_argument("arc '" + id + "' has negative capacity");
  if (expansion_cost < 0) throw std::invalid_argument("arc '" + id + "' has negative cost");
  if (arc_index_.count(id)) throw std::invalid_argument("duplicate arc id '" + id + "'");
  Arc arc{id, tail, head, base_capacity, expansion_cost};
  arcs_.push_back(std::move(arc));
  const int a = num_arcs() - 1;
  outgoing_[tail].push_back(a);
  incoming_[head].push_back(a);
  arc_index_.emplace(std::move(id), a);
  return a;
}

int Network::node_index(std::string_view id) const {
  auto it = node_index_.find(std::string(id));
  return it == node_index_.end() ? -1 : it->second;
}

int Network::arc_index(std::string_view id) const {
  auto it = arc_index_.find(std::string(id));
  return it == arc_index_.end() ? -1 : it->second;
}

namespace {

// whitespace tokenizer that tracks line numbers and strips '#' comments
class Tokens {
 public:
  explicit Tokens(std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) items_.emplace_back(std::move(tok), lineno);
      last_line_ = lineno;
    }
  }

  bool done() const { return pos_ >= items_.size(); }
  int line() const { return done() ? last_line_ : items_[pos_].second; }

  std::string next(const char* what) {
    if (done()) throw ParseError(std::string("unexpected end of input, expected ") + what, last_line_);
    return items_[pos_++].first;
  }

  long next_count(const char* what) {
    const int ln = line();
    const std::string tok = next(what);
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ParseError("expected a nonnegative integer for " + std::string(what) + ", got '" +
                           tok + "'",
                       ln);
    }
  }

  double next_number(const char* what) {
    const int ln = line();
    const std::string tok = next(what);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ParseError("expected a number for " + std::string(what) + ", got '" + tok + "'", ln);
    }
  }

  void expect_keyword(const char* kw) {
    const int ln = line();
    const std::string tok = next(kw);
    if (tok != kw) throw ParseError("expected '" + std::string(kw) + "', got '" + tok + "'", ln);
  }

 private:
  std::vector<std::pair<std::string, int>> items_;
  std::size_t pos_ = 0;
  int last_line_ = 0;
};

}  // namespace

Instance parse_instance(std::istream& in) {
  Tokens t(in);
  Instance inst;

  t.expect_keyword("NODES");
  const long n = t.next_count("node count");
  for (long i = 0; i < n; ++i) {
    const int ln = t.line();
    try {
      inst.network.add_node(t.next("node id"));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), ln);
    }
  }

  t.expect_keyword("ARCS");
  const long m = t.next_count("arc count");
  for (long i = 0; i < m; ++i) {
    const int ln = t.line();
    const std::string id = t.next("arc id");
    const std::string tail = t.next("tail node");
    const std::string head = t.next("head node");
    const double u = t.next_number("capacity");
    const double c = t.next_number("cost");
    const int ti = inst.network.node_index(tail);
    const int hi = inst.network.node_index(head);
    if (ti < 0) throw ParseError("unknown node '" + tail + "' in arc '" + id + "'", ln);
    if (hi < 0) throw ParseError("unknown node '" + head + "' in arc '" + id + "'", ln);
    try {
      inst.network.add_arc(id, ti, hi, u, c);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), ln);
    }
  }

  t.expect_keyword("COMMODITIES");
  const long k = t.next_count("commodity count");
  if (k < 1) throw ParseError("instance needs at least one commodity", t.line());
  for (long i = 0; i < k; ++i) {
    const int ln = t.line();
    Commodity c;
    c.id = t.next("commodity id");
    const std::string src = t.next("source node");
    const std::string dst = t.next("sink node");
    c.source = inst.network.node_index(src);
    c.sink = inst.network.node_index(dst);
    if (c.source < 0) throw ParseError("unknown node '" + src + "' in commodity '" + c.id + "'", ln);
    if (c.sink < 0) throw ParseError("unknown node '" + dst + "' in commodity '" + c.id + "'", ln);
    if (c.source == c.sink)
      throw ParseError("commodity '" + c.id + "' has identical source and sink", ln);
    inst.commodities.push_back(std::move(c));
  }

  t.expect_keyword("PENALTY");
  const int ln = t.line();
  inst.penalty = t.next_number("penalty");
  if (inst.penalty <= 0) throw ParseError("penalty must be positive", ln);
  if (!t.done()) throw ParseError("trailing input after PENALTY", t.line());
  return inst;
}

Instance parse_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file '" + path + "'");
  return parse_instance(in);
}

namespace {
// shortest decimal that round-trips exactly
std::string format_number(double v) {
  char buf[40];
  for (int prec = 9; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::stod(buf) == v) break;
  }
  return buf;
}
}  // namespace

void write_instance(const Instance& inst, std::ostream& out) {
  const Network& net = inst.network;
  out << "NODES " << net.num_nodes() << "\n";
  for (const auto& v : net.nodes()) out << v << "\n";
  out << "ARCS " << net.num_arcs() << "\n";
  for (const Arc& a : net.arcs())
    out << a.id << " " << net.node_name(a.tail) << " " << net.node_name(a.head) << " "
        << format_number(a.base_capacity) << " " << format_number(a.expansion_cost) << "\n";
  out << "COMMODITIES " << inst.num_commodities() << "\n";
  for (const Commodity& c : inst.commodities)
    out << c.id << " " << net.node_name(c.source) << " " << net.node_name(c.sink) << "\n";
  out << "PENALTY " << format_number(inst.penalty) << "\n";
}

std::string write_instance_string(const Instance& inst) {
  std::ostringstream os;
  write_instance(inst, os);
  return os.str();
}

Network import_sndlib(std::istream& in) {
  Network net;
  std::string line;
  enum class Section { None, Nodes, Links, Other } section = Section::None;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "NODES") {
      section = Section::Nodes;
      continue;
    }
    if (tok == "LINKS") {
      section = Section::Links;
      continue;
    }
    if (tok == "DEMANDS" || tok == "META" || tok == "NETWORK" || tok == "ADMISSIBLE_PATHS") {
      section = Section::Other;
      continue;
    }
    if (tok == ")") {
      section = Section::None;
      continue;
    }
    if (section == Section::Nodes) {
      net.add_node(tok);  // coordinates in parentheses are ignored
    } else if (section == Section::Links) {
      // <id> ( <src> <dst> ) <pre_cap> <pre_cost> <routing_cost> <setup_cost>
      //      ( <module_cap> <module_cost> ... )
      std::string paren, src, dst;
      if (!(ls >> paren >> src >> dst) || paren != "(")
        throw ParseError("malformed SNDlib link line", lineno);
      std::string closing;
      ls >> closing;
      double pre_cap = 0.0, module_cost = 0.0;
      std::string field;
      int numeric_seen = 0;
      bool in_modules = false;
      bool module_cost_seen = false;
      while (ls >> field) {
        if (field == "(") {
          in_modules = true;
          numeric_seen = 0;
          continue;
        }
        if (field == ")") break;
        double v = 0.0;
        try {
          v = std::stod(field);
        } catch (const std::exception&) {
          throw ParseError("malformed SNDlib link field '" + field + "'", lineno);
        }
        ++numeric_seen;
        if (!in_modules && numeric_seen == 1) pre_cap = v;
        if (in_modules && numeric_seen == 2 && !module_cost_seen) {
          module_cost = v;
          module_cost_seen = true;
        }
      }
      const int s = net.node_index(src);
      const int t = net.node_index(dst);
      if (s < 0 || t < 0) throw ParseError("SNDlib link references unknown node", lineno);
      net.add_arc(tok, s, t, pre_cap, module_cost);
      net.add_arc(tok + "_r", t, s, pre_cap, module_cost);
    }
  }
  return net;
}

Network make_ring_topology(int nodes, int chords, std::uint64_t seed) {
  if (nodes < 3) throw std::invalid_argument("ring topology needs at least 3 nodes");
  Network net;
  for (int v = 0; v < nodes; ++v) net.add_node("n" + std::to_string(v + 1));

  int arc = 0;
  auto both_directions = [&](int a, int b) {
    net.add_arc("a" + std::to_string(++arc), a, b, 0.0, 1.0);
    net.add_arc("a" + std::to_string(++arc), b, a, 0.0, 1.0);
  };
  for (int v = 0; v < nodes; ++v) both_directions(v, (v + 1) % nodes);

  // chords between non-adjacent pairs, sampled without replacement
  std::vector<std::pair<int, int>> candidates;
  for (int a = 0; a < nodes; ++a)
    for (int b = a + 2; b < nodes; ++b)
      if (!(a == 0 && b == nodes - 1)) candidates.emplace_back(a, b);
  if (chords > static_cast<int>(candidates.size()))
    throw std::invalid_argument("not enough non-adjacent pairs for requested chords");
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  for (int i = 0; i < chords; ++i) both_directions(candidates[i].first, candidates[i].second);
  return net;
}

Instance generate_random_instance(const Network& topology, int k, std::uint64_t seed,
                                  double penalty) {
  const int n = topology.num_nodes();
  if (n < 2) throw std::invalid_argument("topology needs at least 2 nodes");
  if (k < 1) throw std::invalid_argument("need at least one commodity");
  const long long pairs = static_cast<long long>(n) * (n - 1);
  if (k > pairs)
    throw std::invalid_argument("requested " + std::to_string(k) + " commodities but only " +
                                std::to_string(pairs) + " ordered node pairs exist");
  if (penalty <= 0) throw std::invalid_argument("penalty must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> cost_dist(40.0, 6.0);  // variance 36

  Instance inst;
  for (const auto& v : topology.nodes()) inst.network.add_node(v);
  for (const Arc& a : topology.arcs()) {
    double c = cost_dist(rng);
    while (c <= 0.0) c = cost_dist(rng);  // redraw, never truncate
    inst.network.add_arc(a.id, a.tail, a.head, a.base_capacity, c);
  }

  std::vector<std::pair<int, int>> ordered;
  ordered.reserve(pairs);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t)
      if (s != t) ordered.emplace_back(s, t);
  std::shuffle(ordered.begin(), ordered.end(), rng);
  for (int i = 0; i < k; ++i) {
    Commodity c;
    c.id = "k" + std::to_string(i + 1);
    c.source = ordered[i].first;
    c.sink = ordered[i].second;
    inst.commodities.push_back(std::move(c));
  }
  inst.penalty = penalty;
  return inst;
}

}  // namespace netplan
