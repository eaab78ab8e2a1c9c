#include <gtest/gtest.h>

#include <cmath>

#include "fedcmab/federation.hpp"
#include "test_support.hpp"

namespace fedcmab {
namespace {

using testing::make_shared_instance;
using testing::reference_check;

TEST(CheckAndUpdate, AcceptsInsideRadius) {
  auto res = check_and_update(100, 10, 60, 6, 0.1, 10, 10, 1000);
  EXPECT_TRUE(res.accepted);
  EXPECT_EQ(res.total_units, 200);
  EXPECT_EQ(res.total_good, 120);
}

TEST(CheckAndUpdate, RadiusValue) {
  const double r = 0.1 * std::sqrt(3 * std::log(1e4) / 200);
  EXPECT_NEAR(r, 0.03717, 5e-6);
  // Just inside and just outside the interval around qhat = 0.6.
  EXPECT_TRUE(check_and_update(100, 1000, 60, 1000 * (0.6 + r * 0.999), 0.1, 10, 10, 1000).accepted);
  EXPECT_FALSE(check_and_update(100, 1000, 60, 1000 * (0.6 + r * 1.001), 0.1, 10, 10, 1000).accepted);
  EXPECT_FALSE(check_and_update(100, 1000, 60, 1000 * (0.6 - r * 1.001), 0.1, 10, 10, 1000).accepted);
}

TEST(CheckAndUpdate, RejectsOutsideRadius) {
  auto res = check_and_update(100, 10, 60, 7, 0.1, 10, 10, 1000);
  EXPECT_FALSE(res.accepted);
  EXPECT_EQ(res.total_units, 100);
  EXPECT_EQ(res.total_good, 60);
}

TEST(CheckAndUpdate, RejectsSmallOrNegativeWeights) {
  EXPECT_FALSE(check_and_update(100, 0.0, 60, 0.0, 0.1, 10, 10, 1000).accepted);
  EXPECT_FALSE(check_and_update(100, -3.0, 60, -1.8, 0.1, 10, 10, 1000).accepted);
  EXPECT_FALSE(check_and_update(100, 1.0, 60, 0.6, 0.1, 10, 10, 1000).accepted);
  EXPECT_THROW(check_and_update(0, 10, 0, 6, 0.1, 10, 10, 1000), std::logic_error);
}

TEST(CheckAndUpdate, MatchesReferenceOnRandomCases) {
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < 10000; ++c) {
    const double W = 1 + 5000 * u(rng);
    const double Y = W * u(rng);
    const double w = -20 + 400 * u(rng);
    const double y = w * (Y / W) + (u(rng) - 0.5) * 0.2 * std::abs(w);
    const int n = 1 + static_cast<int>(rng() % 40);
    const std::int64_t t = 1 + static_cast<std::int64_t>(rng() % 100000);
    auto got = check_and_update(W, w, Y, y, 0.1, 10, n, t);
    auto want = reference_check(W, w, Y, y, 0.1, 10, n, t);
    ASSERT_EQ(got.accepted, want.accepted) << "case " << c;
    ASSERT_EQ(got.total_units, want.units) << "case " << c;
    ASSERT_EQ(got.total_good, want.good) << "case " << c;
  }
}

TEST(Schedule, BeforeWindow) {
  CommSchedule s(200, 40000);
  EXPECT_FALSE(should_communicate(5, s));
}

TEST(Schedule, DoublingStep) {
  CommSchedule s(200, 40000);
  s.tau = 256;
  EXPECT_FALSE(should_communicate(255, s));
  EXPECT_TRUE(should_communicate(256, s));
  advance(s);
  EXPECT_EQ(s.tau, 512);
  EXPECT_EQ(s.z, 1);
  EXPECT_FALSE(should_communicate(300, s));
}

TEST(Schedule, RejectsBadWindow) {
  EXPECT_THROW(CommSchedule(0, 10), ConfigError);
  EXPECT_THROW(CommSchedule(20, 10), ConfigError);
}

std::vector<std::int64_t> fire_times(std::int64_t start, std::int64_t stop, std::int64_t T,
                                     int cap) {
  CommSchedule s(start, stop, cap);
  std::vector<std::int64_t> out;
  for (std::int64_t t = 1; t <= T; ++t) {
    if (should_communicate(t, s)) {
      out.push_back(t);
      advance(s);
    }
  }
  return out;
}

TEST(Schedule, DefaultWindowFireTimes) {
  auto times = fire_times(200, 40000, 100000, 0);
  // tau climbs 1, 2, ..., 128 over t = 200..207, then fires at each power of two.
  std::vector<std::int64_t> want{200, 201, 202, 203, 204, 205, 206, 207,
                                 256, 512, 1024, 2048, 4096, 8192, 16384, 32768};
  EXPECT_EQ(times, want);
  EXPECT_LE(static_cast<int>(times.size()), max_communication_rounds(100000));
}

TEST(Schedule, CapBoundsRoundsForAnyWindow) {
  for (std::int64_t T : {16, 100, 1024, 5000}) {
    for (std::int64_t start : {1, 3, 50}) {
      if (start > T) continue;
      const int cap = max_communication_rounds(T);
      auto times = fire_times(start, T, T, cap);
      EXPECT_LE(static_cast<int>(times.size()), cap) << "T=" << T << " start=" << start;
      for (std::size_t a = 1; a < times.size(); ++a) EXPECT_GT(times[a], times[a - 1]);
    }
  }
  // Uncapped, a window starting at 1 fires once per power of two up to T.
  EXPECT_EQ(fire_times(1, 1024, 1024, 0).size(), 11u);
}

AgentEstimates agent_with(std::vector<double> W, std::vector<double> Y, std::vector<double> w,
                          std::vector<double> y) {
  AgentEstimates est(static_cast<int>(W.size()));
  est.total_units = std::move(W);
  est.total_good = std::move(Y);
  est.pending_units = std::move(w);
  est.pending_good = std::move(y);
  for (int i = 0; i < est.producers(); ++i) est.refresh(i);
  return est;
}

TEST(CommunicationRound, SingleAgentSendsNothingButResets) {
  auto inst = make_shared_instance({0.5, 0.7}, {0.1, 0.1}, {10, 10}, 1, 2.0, 0.4, 0.1, 1000);
  std::vector<AgentEstimates> agents{agent_with({50, 50}, {25, 35}, {5, 5}, {2, 4})};
  PrivacyAccountant acct({1.0, 0.01}, 1);
  FederationParams params;
  Rng rng(1);
  auto out = run_communication_round(agents, inst, 1, 200, params, acct, rng);
  EXPECT_EQ(out.delivered, 0);
  EXPECT_EQ(acct.charges(0), 0);
  EXPECT_EQ(agents[0].pending_units, (std::vector<double>{0, 0}));
  EXPECT_EQ(agents[0].pending_good, (std::vector<double>{0, 0}));
  EXPECT_EQ(agents[0].total_units, (std::vector<double>{50, 50}));
}

TEST(CommunicationRound, TwoAgentsMatchStraightLineReplay) {
  auto inst = make_shared_instance({0.5, 0.7, 0.3}, {0.1, 0.1, 0.1}, {3, 8, 40}, 2, 2.0, 0.4,
                                   0.1, 1000);
  FederationParams params;
  params.privacy.epsilon = 50.0;  // small noise so some messages pass
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::vector<AgentEstimates> agents{
        agent_with({400, 400, 400}, {200, 280, 120}, {30, 40, 50}, {15, 28, 15}),
        agent_with({300, 500, 200}, {150, 350, 60}, {20, 60, 10}, {10, 42, 3})};
    auto before = agents;
    PrivacyAccountant acct(params.privacy, 2);
    Rng rng(seed), replay(seed);
    const int z = 1;
    const std::int64_t t = 300;
    run_communication_round(agents, inst, z, t, params, acct, rng);

    const double eps_z = budget_for_round(z, params.privacy.epsilon, inst.horizon());
    double noisy_w[2][3], noisy_y[2][3];
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 3; ++i) {
        std::normal_distribution<double> noise(
            0.0, gaussian_sigma(inst.capacity(i, j), params.privacy.delta, eps_z));
        noisy_w[j][i] = before[j].pending_units[i] + noise(replay);
        noisy_y[j][i] = before[j].pending_good[i] + noise(replay);
      }
    }
    for (int r = 0; r < 2; ++r) {
      const int s = 1 - r;
      for (int i = 0; i < 3; ++i) {
        auto want = reference_check(before[r].total_units[i], noisy_w[s][i],
                                    before[r].total_good[i], noisy_y[s][i], params.omega1,
                                    params.omega2, 2, t);
        ASSERT_EQ(agents[r].total_units[i], want.units) << "seed " << seed;
        ASSERT_EQ(agents[r].total_good[i], want.good) << "seed " << seed;
        ASSERT_EQ(agents[r].pending_units[i], 0.0);
        ASSERT_EQ(agents[r].pending_good[i], 0.0);
      }
    }
    EXPECT_DOUBLE_EQ(acct.spent_epsilon(0), eps_z);
    EXPECT_DOUBLE_EQ(acct.spent_epsilon(1), eps_z);
  }
}

TEST(CommunicationRound, DecisionsIgnoreMessageOrder) {
  // Three agents: receiver 0 gets two messages per producer and must judge
  // both against its state from the start of the round.
  auto inst = make_shared_instance({0.5}, {0.1}, {5}, 3, 2.0, 0.4, 0.1, 1000);
  FederationParams params;
  params.privacy.epsilon = 1e6;
  std::vector<AgentEstimates> agents{agent_with({100}, {50}, {0}, {0}),
                                     agent_with({100}, {50}, {40}, {20}),
                                     agent_with({100}, {50}, {40}, {20})};
  PrivacyAccountant acct(params.privacy, 3);
  Rng rng(3);
  std::vector<TraceRecord> trace;
  TraceSink sink = [&](const TraceRecord& r) { trace.push_back(r); };
  run_communication_round(agents, inst, 1, 300, params, acct, rng, &sink);
  long accepted_by_0 = 0;
  double w_sum = 0, y_sum = 0;
  for (const auto& r : trace) {
    if (r.receiver == 0 && r.accepted) {
      ++accepted_by_0;
      w_sum += r.w_tilde;
      y_sum += r.y_tilde;
    }
  }
  EXPECT_EQ(accepted_by_0, 2);
  EXPECT_NEAR(agents[0].total_units[0], 100 + 10 * w_sum, 1e-9);
  EXPECT_NEAR(agents[0].total_good[0], 50 + 10 * y_sum, 1e-9);
  // Every accepted trace entry passes the filter against the pre-round state.
  for (const auto& r : trace) {
    auto want = reference_check(100, r.w_tilde, 50, r.y_tilde, 0.1, 10, 3, 300);
    EXPECT_EQ(want.accepted, r.accepted);
  }
}

TEST(CommunicationRound, AllRejectedUnderHugeNoise) {
  auto inst = make_shared_instance({0.5, 0.6}, {0.1, 0.1}, {50, 50}, 3, 2.0, 0.4, 0.1, 1000);
  FederationParams params;
  params.privacy.epsilon = 1e-6;
  std::vector<AgentEstimates> agents;
  for (int j = 0; j < 3; ++j) agents.push_back(agent_with({1e8, 1e8}, {5e7, 6e7}, {10, 10}, {5, 6}));
  auto before = agents;
  PrivacyAccountant acct(params.privacy, 3);
  Rng rng(17);
  auto out = run_communication_round(agents, inst, 1, 300, params, acct, rng);
  EXPECT_EQ(out.delivered, 3 * 2 * 2);
  EXPECT_EQ(out.accepted, 0);
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(agents[j].total_units, before[j].total_units);
    EXPECT_EQ(agents[j].total_good, before[j].total_good);
    EXPECT_EQ(agents[j].pending_units, (std::vector<double>{0, 0}));
    EXPECT_EQ(agents[j].pending_good, (std::vector<double>{0, 0}));
  }
}

TEST(CommunicationRound, BudgetFailureLeavesStateUntouched) {
  auto inst = make_shared_instance({0.5}, {0.1}, {5}, 2, 2.0, 0.4, 0.1, 1000);
  FederationParams params;
  std::vector<AgentEstimates> agents{agent_with({100}, {50}, {5}, {2}),
                                     agent_with({100}, {50}, {5}, {3})};
  auto before = agents;
  PrivacyAccountant acct(params.privacy, 2);
  acct.charge(1, 1, 1, 0.95, 0.01);
  Rng rng(1);
  EXPECT_THROW(run_communication_round(agents, inst, 1, 300, params, acct, rng), BudgetExceeded);
  EXPECT_EQ(agents[0], before[0]);
  EXPECT_EQ(agents[1], before[1]);
}

TEST(CommunicationRound, InboxExcludesOwnMessages) {
  std::vector<PrivatizedMessage> outbox(6);
  for (int k = 0; k < 6; ++k) {
    outbox[static_cast<std::size_t>(k)].agent = k / 2;
    outbox[static_cast<std::size_t>(k)].producer = k % 2;
  }
  auto inbox = inbox_for(1, outbox);
  ASSERT_EQ(inbox.messages.size(), 4u);
  for (const auto& m : inbox.messages) EXPECT_NE(m.agent, 1);
  EXPECT_EQ(inbox.messages[0].agent, 0);
  EXPECT_EQ(inbox.messages[3].agent, 2);
}

}  // namespace
}  // namespace fedcmab
