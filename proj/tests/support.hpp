#pragma once

// Seeded generators shared by the property tests.

#include <cstdint>
#include <random>
#include <vector>

#include "tbm/domain.hpp"

namespace tbm::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  RockMassState rock() {
    RockMassState r;
    r.src = integer(2, 5);
    r.ucs = uniform(30.35, 149.03);
    r.rqd = uniform(5.0, 95.0);
    r.cai = uniform(0.5, 5.32);
    r.q = uniform(5.0, 95.21);
    r.ci = uniform(200.0, 550.0);
    r.m = uniform(5.0, 40.0);
    r.mgt = integer(1, 4);
    return r;
  }

  MachineSetting machine() { return {uniform(2000.0, 10000.0), uniform(200.0, 1500.0)}; }

  TunnelingRecord record() {
    TunnelingRecord t;
    t.rock = rock();
    t.machine = machine();
    t.pr = uniform(20.0, 100.0);
    t.ef = uniform(10.0, 60.0);
    return t;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace tbm::testing
