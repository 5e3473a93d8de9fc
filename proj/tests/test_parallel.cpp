#include <doctest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

#include "dephaskit/parallel.hpp"

using dephaskit::parallel_for;

TEST_CASE("every index runs once") {
  for (int jobs : {1, 2, 7}) {
    std::vector<std::atomic<int>> hits(500);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("the lowest failing index wins") {
  for (int jobs : {1, 3}) {
    try {
      parallel_for(100, jobs, [](std::size_t i) {
        if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "17");
    }
  }
  CHECK(dephaskit::default_jobs() >= 1);
}
