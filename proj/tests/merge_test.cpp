#include "support.hpp"

#include "wf/errors.hpp"
#include "wf/merge.hpp"
#include "wf/targets.hpp"

#include <gtest/gtest.h>

using namespace wf;
namespace wt = wf::testing;
using wt::peer_review;

namespace {

const Production& prod(const std::string& id)
{
    return *peer_review().gmwf.find_production(id);
}

Artifact develop(Artifact t, const std::string& at, const std::string& p)
{
    return recompute_bud_states(extend_bud(t, DeweyAddress::parse(at), prod(p), "", "x"));
}

Artifact opened()
{
    return develop(create_case(peer_review().gmwf), "", "A_G.1");
}

const std::vector<Artifact>& targets()
{
    static const auto arts = enumerate_target_artifacts(peer_review().gmwf);
    return arts;
}

}  // namespace

TEST(Merge, DevelopmentWinsOverBud)
{
    Artifact a = opened();
    Artifact b = develop(a, "1", "P2");
    EXPECT_EQ(merge_artifacts(a, b), b);
    EXPECT_EQ(merge_artifacts(b, a), b);
}

TEST(Merge, DisjointDevelopmentsCombine)
{
    Artifact base = develop(develop(develop(opened(), "1", "P2"), "1.1", "P3"), "1.1.1", "P4");
    Artifact left = develop(base, "1.1.1.1", "P5");
    Artifact right = develop(base, "1.1.1.2", "P6");
    Artifact m = merge_artifacts(left, right);
    EXPECT_EQ(term(m.root), "A_G.1[P2[P3[P4[P5[H1ω,I1ω],P6[H2ω,I2ω]],Fω],Dω]]");
    EXPECT_EQ(node_at(m, DeweyAddress::parse("1.1.1.1.1")).state, NodeState::unlocked_bud);
    EXPECT_EQ(node_at(m, DeweyAddress::parse("1.1.1.1.2")).state, NodeState::locked_bud);
}

TEST(Merge, DifferentProductionsConflict)
{
    Artifact a = develop(opened(), "1", "P1");
    Artifact b = develop(opened(), "1", "P2");
    try {
        merge_artifacts(a, b);
        FAIL() << "conflict not detected";
    } catch (const ConflictError& e) {
        EXPECT_EQ(e.address(), "1");
    }
}

TEST(Merge, DifferentStatusesConflict)
{
    Artifact a = recompute_bud_states(extend_bud(opened(), DeweyAddress::parse("1"), prod("P2"), "yes", "EC"));
    Artifact b = recompute_bud_states(extend_bud(opened(), DeweyAddress::parse("1"), prod("P2"), "no", "EC"));
    EXPECT_THROW(merge_artifacts(a, b), ConflictError);
    Artifact c = recompute_bud_states(extend_bud(opened(), DeweyAddress::parse("1"), prod("P2"), "", "EC"));
    EXPECT_EQ(node_at(merge_artifacts(a, c), DeweyAddress::parse("1")).status, "yes");
}

TEST(Merge, PrecedenceFollowsSequentialOrder)
{
    Artifact t = develop(opened(), "1", "P2");
    EXPECT_TRUE(precedence_ready(t, DeweyAddress::parse("1.1")));
    EXPECT_FALSE(precedence_ready(t, DeweyAddress::parse("1.2")));
    t = develop(develop(develop(t, "1.1", "P3"), "1.1.1", "P4"), "1.1.1.2", "P6");
    EXPECT_TRUE(precedence_ready(t, DeweyAddress::parse("1.1.1.1")));
    EXPECT_TRUE(precedence_ready(t, DeweyAddress::parse("1.1.1.2.1")));
    EXPECT_FALSE(precedence_ready(t, DeweyAddress::parse("1.1.2")));
}

TEST(Merge, RecomputeWithWritableSet)
{
    Artifact t = develop(opened(), "1", "P2");
    mutable_node_at(t, DeweyAddress::parse("1.1")).state = NodeState::locked_bud;
    Artifact r = recompute_bud_states(t, SortSet{"D"});
    EXPECT_EQ(node_at(r, DeweyAddress::parse("1.2")).state, NodeState::locked_bud);
    EXPECT_EQ(recompute_bud_states(t), develop(opened(), "1", "P2"));
}

TEST(Merge, GuideRequiresBothCriteria)
{
    LocalGmwf ec = project_gmwf(peer_review().gmwf, peer_review().accreditation_of("EC").read);
    Artifact t = develop(opened(), "1", "P2");
    Artifact partial = project_artifact(t, ec);
    MergeGuide g = find_merge_guide(t, partial, ec);
    EXPECT_EQ(term(g.target.root), "A_G.1[P2[P3[P4[P5[P10,P11],P6[P12,P13]],P9],P8]]");
    Artifact other = project_artifact(develop(opened(), "1", "P1"), ec);
    EXPECT_THROW(find_merge_guide(t, other, ec), InvariantError);
}

TEST(Merge, ExpansionOfRefereeWork)
{
    const Gmawfp& m = peer_review();
    LocalGmwf r1 = project_gmwf(m.gmwf, m.accreditation_of("R1").read);
    Artifact t = develop(develop(develop(opened(), "1", "P2"), "1.1", "P3"), "1.1.1", "P4");
    Artifact partial = project_artifact(t, r1);
    ASSERT_EQ(wt::term_modulo(partial.root, r1), "A_G[C[G1ω+]]");
    partial = recompute_bud_states(extend_bud(partial, DeweyAddress::parse("1.1"), prod("P5"), "", "R1"));
    MergeGuide g = find_merge_guide(t, partial, r1);
    Artifact expanded = three_way_expand(t, partial, g, r1, "R1");
    Artifact pruned = prune_upstairs(expanded, t);
    EXPECT_TRUE(conforms(pruned, m.gmwf));
    EXPECT_EQ(term(pruned.root), "A_G.1[P2[P3[P4[P5[H1ω,I1ω],G2ω],Fω],Dω]]");
    EXPECT_EQ(node_at(pruned, DeweyAddress::parse("1.1.1.1.1")).creator, std::optional<std::string>("R1"));
}

TEST(Merge, PruneKeepsPreviousReplica)
{
    Artifact t = develop(opened(), "1", "P2");
    EXPECT_THROW(prune_upstairs(opened(), t), InvariantError);
    EXPECT_EQ(prune_upstairs(t, opened()), t);
}

// Commutativity, associativity and idempotence over random prefixes of a common target.
TEST(MergeProperties, AlgebraOverRandomPrefixes)
{
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 1000; ++i) {
        const Artifact& target = targets()[static_cast<std::size_t>(i) % targets().size()];
        Artifact a = wt::random_prefix(target, rng);
        Artifact b = wt::random_prefix(target, rng);
        Artifact c = wt::random_prefix(target, rng);
        Artifact ab = merge_artifacts(a, b);
        ASSERT_EQ(ab, merge_artifacts(b, a)) << term(a.root) << " " << term(b.root);
        ASSERT_EQ(merge_artifacts(a, a), a);
        ASSERT_EQ(merge_artifacts(ab, c), merge_artifacts(a, merge_artifacts(b, c)));
        ASSERT_TRUE(is_prefix(a, ab));
        ASSERT_TRUE(is_prefix(b, ab));
        ASSERT_TRUE(is_prefix(ab, target));
        ASSERT_TRUE(conforms(ab, peer_review().gmwf));
    }
}

// Random global replica, the holder's replica after random local decisions:
// a guide exists, the expansion is unique and extends the global replica.
TEST(MergeProperties, GuideAndExpansionFuzz)
{
    const Gmawfp& m = peer_review();
    const std::vector<std::string> actors{"EC", "AE", "R1", "R2"};
    std::map<std::string, AgentState> configured;
    for (const auto& a : actors)
        configured.emplace(a, configure(a, m));
    std::mt19937_64 rng(19);
    std::size_t developed = 0;
    for (int i = 0; i < 1000; ++i) {
        Artifact t = wt::random_execution(m.gmwf, rng, std::uniform_int_distribution<std::size_t>(1, 14)(rng));
        AgentState s = configured.at(actors[static_cast<std::size_t>(i) % actors.size()]);
        s.case_id = "fuzz";
        s.t_global = t;
        Trace trace;
        s = protocol_replicate(std::move(s), trace);
        for (int k = std::uniform_int_distribution<int>(0, 6)(rng); k > 0; --k) {
            auto offers = offered_buds(s);
            if (offers.empty())
                break;
            const Offer& o = offers[std::uniform_int_distribution<std::size_t>(0, offers.size() - 1)(rng)];
            const Production& p = o.productions[std::uniform_int_distribution<std::size_t>(0, o.productions.size() - 1)(rng)];
            s = apply_decision(std::move(s), Decision{o.address, p.id, ""}, trace);
            ++developed;
        }
        const LocalGmwf& local = s.local();
        MergeGuide guide = find_merge_guide(t, *s.t_partial, local);
        ASSERT_TRUE(is_prefix(t, guide.target));
        ASSERT_TRUE(is_prefix(s.t_partial->root, local.local_targets[guide.index].root));
        Artifact first = three_way_expand(t, *s.t_partial, guide, local, s.agent_id());
        Artifact second = three_way_expand(t, *s.t_partial, find_merge_guide(t, *s.t_partial, local), local,
                                           s.agent_id());
        ASSERT_EQ(first, second);
        Artifact pruned = prune_upstairs(first, t);
        ASSERT_TRUE(conforms(pruned, m.gmwf)) << term(pruned.root);
        ASSERT_TRUE(is_prefix(t, pruned));
        ASSERT_TRUE(is_prefix(pruned, guide.target));
    }
    EXPECT_GT(developed, 250u);
}
