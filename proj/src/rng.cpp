#include "ctsim/rng.hpp"

#include "ctsim/pack.hpp"

namespace ctsim::rng {

double Stream::next_normal() {
  return pack::normal_icdf<pack::ScalarPack>(next_unit());
}

}  // namespace ctsim::rng
