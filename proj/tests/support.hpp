#pragma once

#include <gtest/gtest.h>

#include <cstdint>
#include <string>

#include "skewlab/random.hpp"

namespace skewlab::test {

/// Runs `prop` on `cases` values drawn by `gen` from a fixed-seed stream;
/// failures carry the case index so a case can be replayed.
template <class Gen, class Prop>
void for_all(std::size_t cases, std::string_view name, Gen gen, Prop prop) {
  for (std::size_t i = 0; i < cases; ++i) {
    Rng rng(StreamKey{0x5eed, name, i});
    auto value = gen(rng);
    SCOPED_TRACE(std::string(name) + " case " + std::to_string(i));
    prop(value);
    if (::testing::Test::HasFailure()) return;
  }
}

}  // namespace skewlab::test
