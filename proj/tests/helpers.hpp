#pragma once

#include "cnfdiff/placement.hpp"

#include <vector>

namespace cnfdiff::test {

// One cloud, one single-CNF chain. Everything fits.
inline Instance single_cloud_instance() {
  Instance inst;
  inst.network.num_clouds = 1;
  inst.network.cpu_capacity = {10.0};
  inst.network.ram_capacity = {10.0};
  inst.network.bandwidth = Grid<double>(1, 1, 0.0);
  inst.network.allowed_types = {{0}};
  inst.cnf_catalog = {{0, 1.0, 1.0, 2.0}};
  Sfc sfc;
  sfc.sfc_id = 0;
  sfc.node_types = {0};
  sfc.delay_budget = 5.0;
  inst.sfcs = {sfc};
  inst.placement_cost = Grid<double>::from_flat(1, 1, {5.0});
  inst.message_size = 100.0;
  return inst;
}

// Two linked clouds, one 2-CNF chain (types A then B), both types allowed
// everywhere. Bandwidth 50, message 100, proc delays 1 and 2.
inline Instance two_cloud_chain_instance() {
  Instance inst;
  inst.network.num_clouds = 2;
  inst.network.cpu_capacity = {10.0, 10.0};
  inst.network.ram_capacity = {10.0, 10.0};
  inst.network.bandwidth = Grid<double>::from_flat(2, 2, {0.0, 50.0, 50.0, 0.0});
  inst.network.allowed_types = {{0, 1}, {0, 1}};
  inst.cnf_catalog = {{0, 1.0, 1.0, 1.0}, {1, 1.0, 1.0, 2.0}};
  Sfc sfc;
  sfc.sfc_id = 0;
  sfc.node_types = {0, 1};
  sfc.dag_edges = {{0, 1, 10.0}};
  sfc.delay_budget = 10.0;
  inst.sfcs = {sfc};
  inst.placement_cost = Grid<double>::from_flat(2, 2, {3.0, 4.0, 1.0, 2.0});
  inst.message_size = 100.0;
  return inst;
}

// Diamond DAG root->{1,2}->3 on a fully linked 2-cloud network.
inline Instance diamond_instance() {
  Instance inst;
  inst.network.num_clouds = 2;
  inst.network.cpu_capacity = {20.0, 20.0};
  inst.network.ram_capacity = {20.0, 20.0};
  inst.network.bandwidth = Grid<double>::from_flat(2, 2, {0.0, 40.0, 40.0, 0.0});
  inst.network.allowed_types = {{0, 1, 2}, {0, 1, 2}};
  inst.cnf_catalog = {{0, 1.0, 1.0, 1.0}, {1, 1.0, 1.0, 2.0}, {2, 1.0, 1.0, 0.5}};
  Sfc sfc;
  sfc.sfc_id = 0;
  sfc.node_types = {0, 1, 2, 0};
  sfc.dag_edges = {{0, 1, 5.0}, {0, 2, 6.0}, {1, 3, 7.0}, {2, 3, 8.0}};
  sfc.delay_budget = 20.0;
  inst.sfcs = {sfc};
  inst.placement_cost = Grid<double>::from_flat(2, 3, {2.0, 3.0, 4.0, 5.0, 1.0, 6.0});
  inst.message_size = 80.0;
  return inst;
}

inline Placement place_all(const Instance& inst, const std::vector<int>& clouds) {
  return Placement::from_assignment(clouds, static_cast<std::size_t>(inst.num_clouds()));
}

}  // namespace cnfdiff::test
