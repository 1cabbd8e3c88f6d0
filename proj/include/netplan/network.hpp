#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace netplan {

/// Parse failure with the 1-based input line it was detected on.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Arc {
  std::string id;
  int tail = -1;  // node index
  int head = -1;
  double base_capacity = 0.0;   // u_a
  double expansion_cost = 0.0;  // c_a per capacity unit
};

/// Directed graph with per-node incidence lists. Arcs are directed exactly
/// as written; nothing is mirrored automatically. Immutable in practice once
/// built, hence safe to share across threads.
class Network {
 public:
  int add_node(std::string id);
  int add_arc(std::string id, int tail, int head, double base_capacity,
              double expansion_cost);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::string& node_name(int v) const { return nodes_[v]; }
  int node_index(std::string_view id) const;
  int arc_index(std::string_view id) const;

  /// delta^-(v): indices of arcs entering v.
  const std::vector<int>& incoming(int v) const { return incoming_[v]; }
  /// delta^+(v): indices of arcs leaving v.
  const std::vector<int>& outgoing(int v) const { return outgoing_[v]; }

 private:
  std::vector<std::string> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> incoming_;
  std::vector<std::vector<int>> outgoing_;
  std::unordered_map<std::string, int> node_index_;
  std::unordered_map<std::string, int> arc_index_;
};

struct Commodity {
  std::string id;
  int source = -1;  // s^k
  int sink = -1;    // t^k
};

/// A network plus the demand side: commodities and the outsourcing penalty.
struct Instance {
  Network network;
  std::vector<Commodity> commodities;
  double penalty = 0.0;  // phi, cost per unit of unmet demand

  int num_commodities() const { return static_cast<int>(commodities.size()); }
};

/// Reads the line-oriented instance format (NODES/ARCS/COMMODITIES/PENALTY
/// sections, '#' comments). Throws ParseError with a line number on
/// malformed input, unknown node references, negative capacities or costs,
/// and duplicate identifiers.
Instance parse_instance(std::istream& in);
Instance parse_instance_file(const std::string& path);

/// Inverse of parse_instance: parse(write(inst)) == inst field-exact.
void write_instance(const Instance& inst, std::ostream& out);
std::string write_instance_string(const Instance& inst);

/// Subset importer for SNDlib native files: nodes and links only, demands
/// ignored. Every (undirected) SNDlib link becomes two directed arcs, one
/// per direction, sharing the link's preinstalled capacity as u_a and its
/// first module's cost as c_a.
Network import_sndlib(std::istream& in);

/// Ring of `nodes` plus `chords` extra node pairs, every edge materialized
/// in both directions, u_a = 0 and unit costs. Deterministic in the seed.
Network make_ring_topology(int nodes, int chords, std::uint64_t seed);

/// Fresh instance on the given topology: expansion costs drawn i.i.d. from
/// Normal(mean 40, variance 36) with non-positive draws rejected, k distinct
/// (source, sink) pairs drawn uniformly without replacement from the ordered
/// node pairs, penalty as given. Deterministic in the seed.
Instance generate_random_instance(const Network& topology, int k, std::uint64_t seed,
                                  double penalty = 130.0);

}  // namespace netplan
