#include <gtest/gtest.h>

#include "darklabel/engine.hpp"
#include "darklabel/error.hpp"
#include "support.hpp"

using namespace darklabel;
using namespace std::chrono_literals;

namespace {

const std::string kModel = "mock-lexicon-v1";

Completion ok(const std::string& label) { return {"ANSWER: Label: [" + label + "]\nEXPLANATION: e\n", {10, 5}, false}; }

struct Recorder {
  std::vector<std::chrono::milliseconds> sleeps;
  RetryPolicy policy() {
    RetryPolicy p;
    p.sleep = [this](std::chrono::milliseconds d) { sleeps.push_back(d); };
    return p;
  }
};

GroupOutcome run(dltest::ScriptedProvider& provider, int budget, Recorder& rec, std::size_t group = 1) {
  return retry_group(provider, ChatRequest::user(kModel, "prompt"), group, sentiment_scale(), budget, rec.policy(),
                     CostTable::defaults());
}

}  // namespace

TEST(Retry, RetryableFailuresAreReissued) {
  for (auto failure : {ProviderFailure(ErrorCode::Transport, "reset"), ProviderFailure(ErrorCode::RateLimited, "slow", 429),
                       ProviderFailure(ErrorCode::ProviderError, "boom", 503)}) {
    dltest::ScriptedProvider p([&](const ChatRequest&, int call) {
      if (call == 0) throw failure;
      return ok("Neutral");
    });
    Recorder rec;
    const auto out = run(p, 2, rec);
    EXPECT_EQ(out.attempts, 2);
    EXPECT_FALSE(out.failure);
    EXPECT_EQ(out.results[0].answer->label, "Neutral");
    EXPECT_EQ(rec.sleeps.size(), 1u);
  }
}

TEST(Retry, ClientErrorsAreNotRetried) {
  dltest::ScriptedProvider p([](const ChatRequest&, int) -> Completion {
    throw ProviderFailure(ErrorCode::ProviderError, "bad request", 400);
  });
  Recorder rec;
  const auto out = run(p, 3, rec);
  EXPECT_EQ(p.calls(), 1);
  ASSERT_TRUE(out.failure);
  EXPECT_EQ(out.failure->code(), ErrorCode::ProviderError);
}

TEST(Retry, UnparsedOutputIsRetriedWithinBudget) {
  dltest::ScriptedProvider p([](const ChatRequest&, int) { return Completion{"no idea", {1, 1}, false}; });
  Recorder rec;
  const auto out = run(p, 3, rec);
  EXPECT_EQ(p.calls(), 3);
  EXPECT_EQ(out.attempts, 3);
  EXPECT_FALSE(out.failure);
  EXPECT_EQ(out.results[0].error->code(), ErrorCode::NoAnswerSection);
  // Every attempt is billed.
  EXPECT_EQ(out.usage, (Usage{3, 3}));
}

TEST(Retry, BudgetOfOneMeansNoRetry) {
  dltest::ScriptedProvider p([](const ChatRequest&, int) -> Completion { throw ProviderFailure(ErrorCode::Transport, "x"); });
  Recorder rec;
  const auto out = run(p, 1, rec);
  EXPECT_EQ(p.calls(), 1);
  EXPECT_TRUE(rec.sleeps.empty());
  EXPECT_EQ(out.failure->code(), ErrorCode::Transport);
}

TEST(Retry, RetryAfterIsALowerBound) {
  dltest::ScriptedProvider p([](const ChatRequest&, int call) {
    if (call == 0) throw ProviderFailure(ErrorCode::RateLimited, "slow", 429, 7s);
    return ok("Positive");
  });
  Recorder rec;
  run(p, 2, rec);
  ASSERT_EQ(rec.sleeps.size(), 1u);
  EXPECT_GE(rec.sleeps[0], 7000ms);
}

TEST(Retry, BackoffIsBoundedFullJitter) {
  RetryPolicy p;
  p.base_delay = 100ms;
  for (int attempt = 0; attempt < 6; ++attempt) {
    const auto cap = 100.0 * (1 << attempt);
    for (std::uint64_t stream = 0; stream < 50; ++stream) {
      const auto d = p.backoff(attempt, stream);
      EXPECT_GE(d.count(), 0);
      EXPECT_LE(static_cast<double>(d.count()), cap);
      EXPECT_EQ(d, p.backoff(attempt, stream));
    }
  }
}

TEST(Retry, PartialMultiResponseRetriesWholeGroup) {
  dltest::ScriptedProvider p([](const ChatRequest&, int call) {
    if (call == 0) return Completion{"data-instance-1\nANSWER: Label: [Neutral]\n", {1, 1}, false};
    return Completion{"data-instance-1\nANSWER: Label: [Neutral]\n======\ndata-instance-2\nANSWER: Label: [Negative]\n",
                      {1, 1}, false};
  });
  Recorder rec;
  const auto out = run(p, 2, rec, 2);
  EXPECT_EQ(out.attempts, 2);
  EXPECT_EQ(out.results[1].answer->label, "Negative");
}

TEST(Retry, CostsAccumulateAcrossAttempts) {
  dltest::ScriptedProvider p([](const ChatRequest&, int call) {
    if (call == 0) return Completion{"garbage", {1'000'000, 0}, false};
    return Completion{"ANSWER: Label: [Neutral]", {0, 1'000'000}, false};
  });
  Recorder rec;
  const auto out = run(p, 2, rec);
  EXPECT_DOUBLE_EQ(out.cost, 20.0);
}

TEST(Retry, InvalidBudget) {
  dltest::ScriptedProvider p([](const ChatRequest&, int) { return ok("Neutral"); });
  Recorder rec;
  EXPECT_THROW(run(p, 0, rec), Error);
}
