#include "helpers.hpp"

#include <eass/guarantee.hpp>

#include <gtest/gtest.h>

#include <vector>

using namespace eass;
using namespace testing_support;

TEST(AcceptanceTest, SumsPositiveSpareCapacity) {
    auto t = built({job(2, 0, 5, 2), job(1, 0, 10, 4)}, 12);
    EXPECT_TRUE(acceptance_test(t, job(9, 0, 12, 4)));
    EXPECT_TRUE(acceptance_test(t, job(9, 0, 12, 6)));
    EXPECT_FALSE(acceptance_test(t, job(9, 0, 12, 7)));
}

TEST(AcceptanceTest, NegativeSpareCapacityContributesNothing) {
    auto t = built({job(1, 0, 4, 2), job(2, 2, 6, 4)}, 6);
    EXPECT_FALSE(acceptance_test(t, job(9, 0, 6, 1)));
}

TEST(AcceptanceTest, ZeroWcet) {
    auto t = built({job(1, 0, 4, 4)}, 4);
    EXPECT_TRUE(acceptance_test(t, job(9, 0, 4, 0)));
}

TEST(AcceptanceTest, DeadlineInsideIntervalCountsOnlyUsableSlots) {
    // [0,10) empty with sc 10; a job due at 3 can use 3 slots, not 10.
    auto t = built({}, 10);
    EXPECT_TRUE(acceptance_test(t, job(9, 0, 3, 3)));
    EXPECT_FALSE(acceptance_test(t, job(9, 0, 3, 4)));
}

TEST(AcceptanceTest, FutureReleaseExcludesEarlierSlots) {
    auto t = built({}, 10);
    EXPECT_TRUE(acceptance_test(t, job(9, 5, 10, 5)));
    EXPECT_FALSE(acceptance_test(t, job(9, 6, 10, 5)));
}

TEST(AcceptanceTest, BusyWindowIsSubtracted) {
    auto t = built({}, 10);
    EXPECT_TRUE(acceptance_test(t, job(9, 0, 6, 3), Slot{3}));
    EXPECT_FALSE(acceptance_test(t, job(9, 0, 6, 4), Slot{3}));
}

TEST(InsertJob, SplitsAndReevaluates) {
    auto t = built({}, 10);
    insert_job(t, job(9, 0, 5, 1));
    ASSERT_EQ(t.intervals.size(), 2u);
    EXPECT_EQ(t.intervals[0].end, 5);
    EXPECT_EQ(sc_of(t), (std::vector<std::int64_t>{4, 5}));
    EXPECT_EQ(sc_of(t), reference_sc(t));
}

TEST(InsertJob, ExistingBoundaryGrowsMemberSet) {
    auto t = built({job(2, 0, 5, 2), job(1, 0, 10, 4)}, 12);
    insert_job(t, job(9, 0, 10, 1));
    ASSERT_EQ(t.intervals.size(), 3u);
    EXPECT_EQ(t.intervals[1].jobs.size(), 2u);
    EXPECT_EQ(sc_of(t), (std::vector<std::int64_t>{3, 0, 2}));
}

TEST(InsertJob, ZeroWcetLeavesScUnchanged) {
    auto t = built({job(2, 0, 5, 2), job(1, 0, 10, 4)}, 12);
    const auto before = sc_of(t);
    insert_job(t, job(9, 0, 10, 0));
    EXPECT_EQ(sc_of(t), before);
}

TEST(InsertJob, SplitOfLaterIntervalMatchesReference) {
    auto t = built({job(1, 0, 4, 2), job(2, 0, 20, 6)}, 20);
    insert_job(t, job(9, 2, 9, 3));
    EXPECT_EQ(sc_of(t), reference_sc(t));
    EXPECT_TRUE(verify_feasible(t));
}

static std::vector<CoreState> cores_from(std::vector<CoreTable> tables) {
    std::vector<CoreState> v;
    for (auto& t : tables) v.push_back(make_core_state(std::move(t)));
    return v;
}

TEST(Admit, DelegatesToNextCore) {
    std::vector<CoreTable> tables;
    tables.push_back(built({job(1, 0, 10, 10)}, 10));
    tables.push_back(built({}, 10));
    tables[1].core = 1;
    auto cores = cores_from(std::move(tables));
    auto out = admit(cores, {job(9, 0, 10, 3), 0});
    EXPECT_TRUE(out.accepted);
    EXPECT_EQ(out.core, 1);
    EXPECT_TRUE(out.delegated);
    EXPECT_EQ(cores[1].table.jobs.size(), 1u);
}

TEST(Admit, RejectLeavesEveryCoreUntouched) {
    std::vector<CoreTable> tables;
    tables.push_back(built({job(1, 0, 10, 9)}, 10));
    tables.push_back(built({job(2, 0, 10, 8)}, 10));
    tables[1].core = 1;
    auto cores = cores_from(std::move(tables));
    const auto before = cores;
    auto out = admit(cores, {job(9, 0, 10, 3), 0});
    EXPECT_FALSE(out.accepted);
    EXPECT_EQ(cores, before);
}

TEST(Admit, PreferredCoreFirst) {
    std::vector<CoreTable> tables;
    tables.push_back(built({}, 10));
    tables.push_back(built({}, 10));
    tables[1].core = 1;
    auto cores = cores_from(std::move(tables));
    const auto core0 = cores[0];
    auto out = admit(cores, {job(9, 0, 10, 3), 1});
    EXPECT_TRUE(out.accepted);
    EXPECT_EQ(out.core, 1);
    EXPECT_FALSE(out.delegated);
    EXPECT_EQ(cores[0], core0);
}

TEST(Admit, WindowTooShort) {
    auto cores = cores_from({built({}, 10)});
    EXPECT_FALSE(admit(cores, {job(9, 0, 2, 3), 0}).accepted);
    EXPECT_FALSE(admit(cores, {job(9, 0, 12, 1), 0}).accepted);
}

TEST(AdmitPeriodic, AllOrNothing) {
    auto cores = cores_from({built({job(1, 0, 20, 12)}, 20)});
    const auto before = cores;
    TaskSpec t;
    t.id = 5;
    t.wcet = 3;
    t.period = 5;
    EXPECT_FALSE(admit_periodic(cores, t, 0).accepted);
    EXPECT_EQ(cores, before);
    t.wcet = 2;
    auto out = admit_periodic(cores, t, 0);
    EXPECT_TRUE(out.accepted);
    EXPECT_EQ(cores[0].table.jobs.size(), 5u);
    EXPECT_TRUE(verify_feasible(cores[0].table));
}
