// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "traincast/errors.hpp"
#include "traincast/profiles.hpp"

using namespace traincast;

namespace {

constexpr std::uint64_t kMiB = 1024 * 1024;

BandwidthRecord rec(CollOp op, Locality loc, const char* topo, std::int64_t scale,
                    std::uint64_t msg, double bw) {
  return {op, loc, topo, scale, msg, bw};
}

}  // namespace

TEST_CASE("single-row ingest") {
  const BandwidthProfile p = BandwidthProfile::ingest(
      {rec(CollOp::AllReduce, Locality::Intra, "nvlink", 4, kMiB, 10e9)});
  CHECK(p.size() == 1);
  CHECK(p.lookup(CollOp::AllReduce, Locality::Intra, "nvlink", 4, kMiB) == 10e9);
}

TEST_CASE("duplicate (key, size) rows: last wins") {
  BandwidthProfile p = BandwidthProfile::ingest(
      {rec(CollOp::P2p, Locality::Intra, "pcie", 2, kMiB, 5e9),
       rec(CollOp::P2p, Locality::Intra, "pcie", 2, kMiB, 7e9)});
  CHECK(p.size() == 1);
  CHECK(p.lookup(CollOp::P2p, Locality::Intra, "pcie", 2, kMiB) == 7e9);
  p.merge({rec(CollOp::P2p, Locality::Intra, "pcie", 2, kMiB, 9e9)});
  CHECK(p.size() == 1);
  CHECK(p.lookup(CollOp::P2p, Locality::Intra, "pcie", 2, kMiB) == 9e9);
}

TEST_CASE("ingest rejects bad rows") {
  try {
    BandwidthProfile::ingest(
        {rec(CollOp::P2p, Locality::Intra, "pcie", 2, kMiB, 0.0)});
    FAIL("expected NonPositiveBandwidth");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonPositiveBandwidth);
  }
  try {
    parse_bandwidth_csv("op,locality,topology,scale,msg_bytes,bw_bytes_per_s\n"
                        "allreduce,intra,pcie,4,notanumber,1e9\n");
    FAIL("expected MalformedRow");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedRow);
  }
  try {
    parse_bandwidth_csv("allreduce,intra,pcie,4,1048576\n");
    FAIL("expected MalformedRow for short row");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedRow);
  }
}

TEST_CASE("lookup is exact at knots and log-linear between them") {
  const BandwidthProfile p = BandwidthProfile::ingest(
      {rec(CollOp::AllReduce, Locality::Intra, "nvlink", 0, kMiB, 4e9),
       rec(CollOp::AllReduce, Locality::Intra, "nvlink", 0, 4 * kMiB, 8e9)});
  CHECK(p.lookup(CollOp::AllReduce, Locality::Intra, "nvlink", 0, kMiB) == 4e9);
  CHECK(p.lookup(CollOp::AllReduce, Locality::Intra, "nvlink", 0, 4 * kMiB) == 8e9);
  // 2 MiB is the log2 midpoint of [1 MiB, 4 MiB].
  CHECK(p.lookup(CollOp::AllReduce, Locality::Intra, "nvlink", 0, 2 * kMiB) ==
        doctest::Approx(6e9).epsilon(1e-12));
  // Clamped outside the sampled range.
  CHECK(p.lookup(CollOp::AllReduce, Locality::Intra, "nvlink", 0, 1) == 4e9);
  CHECK(p.lookup(CollOp::AllReduce, Locality::Intra, "nvlink", 0, 1ULL << 40) == 8e9);
}

TEST_CASE("lookup stays within bracketing knot values") {
  const BandwidthProfile p = BandwidthProfile::ingest(
      {rec(CollOp::P2p, Locality::Inter, "nvswitch", 0, 1024, 1e9),
       rec(CollOp::P2p, Locality::Inter, "nvswitch", 0, 65536, 5e9),
       rec(CollOp::P2p, Locality::Inter, "nvswitch", 0, 1048576, 3e9)});
  for (std::uint64_t msg = 1024; msg <= 1048576; msg *= 2) {
    const double bw = p.lookup(CollOp::P2p, Locality::Inter, "nvswitch", 0, msg);
    CHECK(bw >= 1e9);
    CHECK(bw <= 5e9);
  }
}

TEST_CASE("missing keys are hard errors, scale 0 is the only fallback") {
  const BandwidthProfile p = BandwidthProfile::ingest(
      {rec(CollOp::AllReduce, Locality::Intra, "nvlink", 0, kMiB, 4e9),
       rec(CollOp::AllReduce, Locality::Intra, "nvswitch", 8, kMiB, 9e9)});
  // Exact scale miss falls back to the explicit any-scale family.
  CHECK(p.lookup(CollOp::AllReduce, Locality::Intra, "nvlink", 16, kMiB) == 4e9);
  // No any-scale family: hard error.
  try {
    p.lookup(CollOp::AllReduce, Locality::Intra, "nvswitch", 4, kMiB);
    FAIL("expected MissingProfileKey");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingProfileKey);
  }
  CHECK_THROWS_AS(p.lookup(CollOp::AllToAll, Locality::Intra, "nvlink", 0, kMiB),
                  Error);
}

TEST_CASE("bundled defaults carry the reference anchors") {
  const BandwidthProfile p = default_bandwidth_profile();
  const std::uint64_t huge = 1ULL << 34;
  // Intra p2p maxima: 13.2 / 48.4 / 174 GB/s.
  CHECK(p.lookup(CollOp::P2p, Locality::Intra, "pcie", 0, huge) == 13.2e9);
  CHECK(p.lookup(CollOp::P2p, Locality::Intra, "nvlink", 0, huge) == 48.4e9);
  CHECK(p.lookup(CollOp::P2p, Locality::Intra, "nvswitch", 0, huge) == 174e9);
  // Saturation thresholds: plateau reached by 2 / 16 / 128 MB.
  CHECK(p.lookup(CollOp::P2p, Locality::Intra, "pcie", 0, 2 * kMiB) ==
        p.lookup(CollOp::P2p, Locality::Intra, "pcie", 0, huge));
  CHECK(p.lookup(CollOp::P2p, Locality::Intra, "nvlink", 0, 16 * kMiB) ==
        p.lookup(CollOp::P2p, Locality::Intra, "nvlink", 0, huge));
  CHECK(p.lookup(CollOp::P2p, Locality::Intra, "nvswitch", 0, 128 * kMiB) ==
        p.lookup(CollOp::P2p, Locality::Intra, "nvswitch", 0, huge));
  // AllReduce plateaus ~50 / 1000 / 1500 Gbps expressed in bytes/s.
  CHECK(p.lookup(CollOp::AllReduce, Locality::Intra, "pcie", 0, huge) == 6.25e9);
  CHECK(p.lookup(CollOp::AllReduce, Locality::Intra, "nvlink", 0, huge) == 125e9);
  CHECK(p.lookup(CollOp::AllReduce, Locality::Intra, "nvswitch", 0, huge) == 187.5e9);
}

TEST_CASE("utilization lookup") {
  const UtilizationProfile p = UtilizationProfile::ingest(
      {{2.4e9, 2, 0.4}, {2.4e9, 6, 0.6}, {1.2e9, 2, 0.3}});
  SUBCASE("exact sample") {
    CHECK(p.lookup(2.4e9, 6) == 0.6);
    CHECK(p.lookup(2.4e9, 2) == 0.4);
  }
  SUBCASE("linear midpoint in micro-batch") {
    CHECK(p.lookup(2.4e9, 4) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("clamped at the range ends") {
    CHECK(p.lookup(2.4e9, 1) == 0.4);
    CHECK(p.lookup(2.4e9, 100) == 0.6);
  }
  SUBCASE("nearest model size") {
    CHECK(p.lookup(1.1e9, 2) == 0.3);
    CHECK(p.lookup(1e12, 2) == 0.4);
  }
  SUBCASE("keying ignores parallel scale by construction") {
    // One single-GPU measurement serves every model-parallel scale.
    const double mu = p.lookup(2.4e9, 6);
    for (int scale : {16, 32, 64}) {
      (void)scale;
      CHECK(p.lookup(2.4e9, 6) == mu);
    }
  }
}

TEST_CASE("empty utilization profile is a hard error") {
  const UtilizationProfile p;
  try {
    p.lookup(1e9, 4);
    FAIL("expected EmptyProfile");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyProfile);
  }
}

TEST_CASE("utilization ingest validates mu") {
  try {
    UtilizationProfile::ingest({{1e9, 2, 1.5}});
    FAIL("expected MalformedRow");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedRow);
  }
}

TEST_CASE("ingest -> export -> ingest round-trips identically") {
  const BandwidthProfile bw = default_bandwidth_profile();
  const UtilizationProfile mu = default_utilization_profile();

  const std::string bw_csv = bandwidth_to_csv(bw);
  const BandwidthProfile bw2 = BandwidthProfile::ingest(parse_bandwidth_csv(bw_csv));
  CHECK(bandwidth_to_csv(bw2) == bw_csv);
  CHECK(bw2.size() == bw.size());

  const std::string mu_csv = utilization_to_csv(mu);
  const UtilizationProfile mu2 =
      UtilizationProfile::ingest(parse_utilization_csv(mu_csv));
  CHECK(utilization_to_csv(mu2) == mu_csv);
  CHECK(mu2.size() == mu.size());
}
