#include <cmath>
#include <map>

#include "doctest.h"
#include "lib2vec/netgen.hpp"
#include "support/toy_library.hpp"

using namespace lib2vec;
using testsupport::toy_library;

namespace {

const Library& lib() {
  static Library l = toy_library();
  return l;
}

// Two-port reference circuit: n0 = AND2(p0, p1), n1 = INV(n0).
Netlist tiny_netlist() {
  Netlist nl;
  nl.name = "tiny";
  nl.ports = {"p0", "p1"};
  Instance u0;
  u0.name = "u0";
  u0.cell = "AND2x1";
  u0.pin_nets = {{"A", "p0"}, {"B", "p1"}};
  u0.output_net = "n0";
  u0.level = 1;
  Instance u1;
  u1.name = "u1";
  u1.cell = "INVx1";
  u1.pin_nets = {{"A", "n0"}};
  u1.output_net = "n1";
  u1.level = 2;
  nl.instances = {u0, u1};
  return nl;
}

}  // namespace

TEST_CASE("generated netlists satisfy the envelope and are leveled DAGs") {
  NetlistEnvelope env;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Netlist nl = generate_netlist(lib(), seed);
    CHECK(nl.instances.size() >= env.min_cells);
    CHECK(nl.instances.size() <= env.max_cells);
    CHECK(nl.ports.size() >= env.min_ports);
    CHECK(nl.ports.size() <= env.max_ports);
    CHECK(nl.num_edges() >= env.min_edges);
    CHECK(nl.num_edges() <= env.max_edges);
    CHECK(nl.num_levels() >= env.min_levels);
    CHECK(nl.num_levels() <= env.max_levels);

    std::map<std::string, std::size_t> net_level;
    for (const auto& p : nl.ports) net_level[p] = 0;
    for (const auto& inst : nl.instances) {
      std::size_t max_in = 0;
      for (const auto& [pin, net] : inst.pin_nets) {
        REQUIRE(net_level.count(net));  // every input is driven by an earlier net
        max_in = std::max(max_in, net_level.at(net));
      }
      CHECK(inst.level == max_in + 1);
      const Cell& cell = lib().cells.at(inst.cell);
      CHECK(inst.pin_nets.size() == cell.input_pins.size());
      net_level[inst.output_net] = inst.level;
    }
  }
}

TEST_CASE("netlist generation is deterministic per seed") {
  CHECK(netlist_to_json(generate_netlist(lib(), 5)) == netlist_to_json(generate_netlist(lib(), 5)));
  CHECK(netlist_to_json(generate_netlist(lib(), 5)) != netlist_to_json(generate_netlist(lib(), 6)));
}

TEST_CASE("contradictory envelopes are rejected") {
  NetlistEnvelope env;
  env.min_cells = 10;
  env.max_cells = 5;
  CHECK_THROWS_AS(generate_netlist(lib(), 1, env), EnvelopeInfeasible);
  NetlistEnvelope env2;
  env2.min_edges = 2000;
  env2.max_edges = 3000;
  CHECK_THROWS_AS(generate_netlist(lib(), 1, env2), EnvelopeInfeasible);
}

TEST_CASE("netlist json round trips") {
  Netlist nl = generate_netlist(lib(), 9);
  Netlist back = netlist_from_json(netlist_to_json(nl));
  CHECK(netlist_to_json(back) == netlist_to_json(nl));
}

TEST_CASE("exhaustive simulation reproduces hand-computed probabilities") {
  LogicLabels labels = simulate_exhaustive(lib(), tiny_netlist());
  CHECK(labels.exhaustive);
  CHECK(labels.num_vectors == 4);
  CHECK(labels.logic_probability.at("p0") == doctest::Approx(0.5));
  CHECK(labels.logic_probability.at("n0") == doctest::Approx(0.25));
  CHECK(labels.logic_probability.at("n1") == doctest::Approx(0.75));
  CHECK(labels.switching_activity.at("n0") == doctest::Approx(2.0 * 0.25 * 0.75));
  CHECK(labels.switching_activity.at("n1") == doctest::Approx(2.0 * 0.25 * 0.75));
}

TEST_CASE("monte carlo simulation converges to the exhaustive answer") {
  Netlist nl = tiny_netlist();
  const std::size_t n = 20000;
  LogicLabels mc = simulate_random(lib(), nl, n, 3);
  CHECK_FALSE(mc.exhaustive);
  LogicLabels exact = simulate_exhaustive(lib(), nl);
  for (const auto& [net, p] : exact.logic_probability) {
    double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
    CHECK(std::abs(mc.logic_probability.at(net) - p) <= 4 * sigma + 1e-12);
    double q = 2 * p * (1 - p);
    double sigma_q = std::sqrt(std::max(0.0, q * (2 - 3 * q)) / static_cast<double>(n));
    CHECK(std::abs(mc.switching_activity.at(net) - q) <= 4 * sigma_q + 1e-12);
  }
}

TEST_CASE("word-packed switching counts match a scalar replay") {
  Netlist nl = tiny_netlist();
  const std::size_t n = 130;  // crosses two word boundaries
  LogicLabels mc = simulate_random(lib(), nl, n, 17);
  for (const auto& [net, words] : mc.net_words) {
    auto bit = [&](std::size_t t) { return (words[t / 64] >> (t % 64)) & 1ull; };
    std::size_t ones = 0, toggles = 0;
    for (std::size_t t = 0; t < n; ++t) {
      ones += bit(t);
      if (t + 1 < n) toggles += bit(t) != bit(t + 1);
    }
    CHECK(mc.logic_probability.at(net) ==
          doctest::Approx(static_cast<double>(ones) / static_cast<double>(n)));
    CHECK(mc.switching_activity.at(net) ==
          doctest::Approx(static_cast<double>(toggles) / static_cast<double>(n - 1)));
  }
}

TEST_CASE("auto simulation picks enumeration for small port counts") {
  CHECK(simulate_auto(lib(), tiny_netlist()).exhaustive);
}

TEST_CASE("simulation rejects unknown cells and undriven nets") {
  Netlist nl = tiny_netlist();
  nl.instances[1].pin_nets["A"] = "ghost";
  CHECK_THROWS_AS(simulate_exhaustive(lib(), nl), UnconnectedNet);
  Netlist nl2 = tiny_netlist();
  nl2.instances[0].cell = "NOPE";
  CHECK_THROWS_AS(simulate_exhaustive(lib(), nl2), Error);
}

TEST_CASE("label jsonl lists every net") {
  LogicLabels labels = simulate_exhaustive(lib(), tiny_netlist());
  std::string out = labels_to_jsonl(labels);
  CHECK(out.find("\"net\":\"n1\"") != std::string::npos);
  CHECK(out.find("\"exhaustive\":true") != std::string::npos);
}
