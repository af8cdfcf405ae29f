#include <gtest/gtest.h>

#include <sstream>

#include "fiducia/fragmenter.hpp"
#include "fiducia/rng.hpp"

using namespace fiducia;

namespace {

ItemLexicon lex(std::vector<std::pair<ItemId, std::vector<TokenList>>> items) {
  std::vector<ItemEntry> entries;
  for (auto& [id, aliases] : items) entries.push_back({id, text::join(aliases.front(), " "), aliases});
  return ItemLexicon(std::move(entries));
}

const ItemFragment* fragment_for(const std::vector<ItemFragment>& fs, ItemId id) {
  for (const auto& f : fs)
    if (f.item_id == id) return &f;
  return nullptr;
}

}  // namespace

TEST(Mentions, LongestMatchWins) {
  const auto l = lex({{7, {{"garlic", "bread"}}}, {3, {{"bread"}}}});
  const auto ms = find_mentions({"garlic", "bread", "good"}, l);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0], (Mention{7, 0, 2}));
}

TEST(Mentions, DisjointMatches) {
  const auto l = lex({{1, {{"pasta"}}}, {2, {{"pizza"}}}});
  const auto ms = find_mentions({"pasta", "and", "pizza"}, l);
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[0].item_id, 1);
  EXPECT_EQ(ms[1].item_id, 2);
}

TEST(Mentions, NoMatch) {
  EXPECT_TRUE(find_mentions({"great", "service"}, lex({{1, {{"pasta"}}}})).empty());
}

TEST(Lexicon, SharedAliasRejected) {
  EXPECT_THROW(lex({{1, {{"naan"}}}, {2, {{"naan"}}}}), Error);
  EXPECT_THROW(lex({{1, {{"naan"}, {}}}}), Error);
}

TEST(Lexicon, ParseRoundTrip) {
  std::istringstream in("7\tGarlic Bread\tgarlic bread|Garlic  Toast\n1\tPasta\tpasta\n");
  const auto l = parse_item_lexicon(in);
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l.at(7).aliases[1], (TokenList{"garlic", "toast"}));
  std::istringstream again(serialize_item_lexicon(l));
  EXPECT_EQ(serialize_item_lexicon(parse_item_lexicon(again)), serialize_item_lexicon(l));
}

TEST(Scope, ButSplitsClauses) {
  const TokenList toks = {"pasta", "great", "but", "pizza", "soggy"};
  const auto l = lex({{1, {{"pasta"}}}, {2, {{"pizza"}}}});
  const auto fs = scope_fragments(toks, find_mentions(toks, l), "r");
  ASSERT_EQ(fs.size(), 2u);
  EXPECT_EQ(fragment_for(fs, 1)->tokens, (TokenList{"pasta", "great"}));
  EXPECT_EQ(fragment_for(fs, 2)->tokens, (TokenList{"pizza", "soggy"}));
  EXPECT_EQ(fs[0].review_id, "r");
}

TEST(Scope, SingleMentionCollectsAllClauses) {
  const TokenList toks = {"biryani", "hot", "but", "salty", "however", "filling"};
  const auto l = lex({{4, {{"biryani"}}}});
  const auto fs = scope_fragments(toks, find_mentions(toks, l));
  ASSERT_EQ(fs.size(), 1u);
  EXPECT_EQ(fs[0].tokens, (TokenList{"biryani", "hot", "salty", "filling"}));
}

TEST(Scope, SharedModifierDuplicated) {
  // one clause, two mentions: "cold" goes to both items, each mention token
  // only to its own item
  const TokenList toks = {"pasta", "and", "pizza", "cold"};
  const auto l = lex({{1, {{"pasta"}}}, {2, {{"pizza"}}}});
  const auto fs = scope_fragments(toks, find_mentions(toks, l));
  ASSERT_EQ(fs.size(), 2u);
  EXPECT_EQ(fragment_for(fs, 1)->tokens, (TokenList{"pasta", "and", "cold"}));
  EXPECT_EQ(fragment_for(fs, 2)->tokens, (TokenList{"and", "pizza", "cold"}));
}

TEST(Scope, MentionlessClauseAttachment) {
  const auto l = lex({{1, {{"pasta"}}}, {2, {{"pizza"}}}});
  // preceding mention in the same sentence
  TokenList toks = {"pasta", "ok", "but", "cold", ".", "pizza", "fine"};
  auto fs = scope_fragments(toks, find_mentions(toks, l));
  EXPECT_EQ(fragment_for(fs, 1)->tokens, (TokenList{"pasta", "ok", "cold"}));
  // no preceding: nearest following in the same sentence
  toks = {"sadly", "but", "pizza", "burnt"};
  fs = scope_fragments(toks, find_mentions(toks, l));
  EXPECT_EQ(fragment_for(fs, 2)->tokens, (TokenList{"sadly", "pizza", "burnt"}));
  // a sentence with no mention is dropped
  toks = {"pizza", "burnt", ".", "staff", "rude"};
  fs = scope_fragments(toks, find_mentions(toks, l));
  ASSERT_EQ(fs.size(), 1u);
  EXPECT_EQ(fs[0].tokens, (TokenList{"pizza", "burnt"}));
}

TEST(Scope, NoMentionsNoFragments) { EXPECT_TRUE(scope_fragments({"nice", "place"}, {}).empty()); }

TEST(Scope, PositionsTraceToSource) {
  const TokenList toks = {"pasta", "great", "but", "pizza", "soggy", ".", "pasta", "again"};
  const auto l = lex({{1, {{"pasta"}}}, {2, {{"pizza"}}}});
  for (const auto& f : scope_fragments(toks, find_mentions(toks, l))) {
    ASSERT_EQ(f.tokens.size(), f.positions.size());
    for (std::size_t i = 0; i < f.tokens.size(); ++i) EXPECT_EQ(toks[f.positions[i]], f.tokens[i]);
  }
}

TEST(Scope, RandomizedInvariants) {
  const auto l = lex({{1, {{"pasta"}}}, {2, {{"pizza"}}}, {3, {{"garlic", "bread"}}}});
  const std::vector<std::string> pool = {"pasta", "pizza", "garlic", "bread", "good", "bad",
                                         "cold", ".", "but", "and", "while", "and-then"};
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    TokenList toks;
    const auto len = 1 + rng.below(14);
    for (std::size_t i = 0; i < len; ++i) toks.push_back(pool[rng.below(pool.size())]);
    const auto mentions = find_mentions(toks, l);
    const auto fs = scope_fragments(toks, mentions);
    EXPECT_EQ(fs, scope_fragments(toks, mentions));

    // each source position appears at most once per item and at most
    // (mentions in its clause) times overall
    std::map<std::size_t, std::size_t> uses;
    for (const auto& f : fs) {
      EXPECT_FALSE(f.tokens.empty());
      std::set<std::size_t> seen;
      for (auto p : f.positions) {
        EXPECT_TRUE(seen.insert(p).second);
        ++uses[p];
      }
    }
    for (const auto& [p, n] : uses) EXPECT_LE(n, std::max<std::size_t>(1, mentions.size()));

    std::set<ItemId> items;
    for (const auto& m : mentions) items.insert(m.item_id);
    if (items.size() == 1) {
      ASSERT_EQ(fs.size(), 1u);
      // every token of every sentence containing the mention is kept
      for (const auto& m : mentions)
        for (auto t = m.start; t < m.end; ++t) EXPECT_EQ(uses.count(t), 1u);
    }
    EXPECT_EQ(fs.empty(), mentions.empty());
  }
}

TEST(Arcs, StarGraphSingleFragment) {
  const TokenList toks = {"pasta", "really", "very", "good"};
  const std::vector<Arc> arcs = {{0, 1, "amod"}, {0, 2, "amod"}, {0, 3, "amod"}};
  const auto fs = scope_fragments_with_arcs(toks, {{1, 0, 1}}, arcs);
  ASSERT_EQ(fs.size(), 1u);
  EXPECT_EQ(fs[0].tokens, toks);
}

TEST(Arcs, DisconnectedSubtreesPartition) {
  const TokenList toks = {"pasta", "good", "pizza", "bad"};
  const std::vector<Arc> arcs = {{0, 1, "amod"}, {2, 3, "amod"}};
  const auto fs = scope_fragments_with_arcs(toks, {{1, 0, 1}, {2, 2, 3}}, arcs);
  ASSERT_EQ(fs.size(), 2u);
  EXPECT_EQ(fragment_for(fs, 1)->tokens, (TokenList{"pasta", "good"}));
  EXPECT_EQ(fragment_for(fs, 2)->tokens, (TokenList{"pizza", "bad"}));
}

TEST(Arcs, TieGoesToEarlierMention) {
  const TokenList toks = {"pasta", "with", "pizza"};
  const std::vector<Arc> arcs = {{0, 1, "x"}, {1, 2, "x"}};
  const auto fs = scope_fragments_with_arcs(toks, {{1, 0, 1}, {2, 2, 3}}, arcs);
  EXPECT_EQ(fragment_for(fs, 1)->tokens, (TokenList{"pasta", "with"}));
  EXPECT_EQ(fragment_for(fs, 2)->tokens, (TokenList{"pizza"}));
}

TEST(Arcs, MentionlessComponentDropped) {
  const TokenList toks = {"pasta", "good", "staff", "rude"};
  const auto fs = scope_fragments_with_arcs(toks, {{1, 0, 1}}, {{0, 1, "x"}, {2, 3, "x"}});
  ASSERT_EQ(fs.size(), 1u);
  EXPECT_EQ(fs[0].tokens, (TokenList{"pasta", "good"}));
}

TEST(Arcs, MalformedArcs) {
  const TokenList toks = {"a", "b", "c"};
  auto code = [&](const std::vector<Arc>& arcs) {
    try {
      scope_fragments_with_arcs(toks, {{1, 0, 1}}, arcs);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io_error;
  };
  EXPECT_EQ(code({{0, 5, "x"}}), Errc::malformed_arcs);
  EXPECT_EQ(code({{0, 1, "x"}, {1, 2, "x"}, {2, 0, "x"}}), Errc::malformed_arcs);
}

TEST(ItemLexicon, ResolveByIdNameOrAlias) {
  const ItemLexicon lex({{1, "Garlic Naan", {{"garlic", "naan"}, {"lahsun", "naan"}}}, {2, "Tea", {{"chai"}}}});
  EXPECT_EQ(lex.resolve("1"), 1);
  EXPECT_EQ(lex.resolve("Garlic Naan"), 1);
  EXPECT_EQ(lex.resolve("garlic  NAAN"), 1);
  EXPECT_EQ(lex.resolve("lahsun naan"), 1);
  EXPECT_EQ(lex.resolve("Chai"), 2);
  EXPECT_FALSE(lex.resolve("coffee"));
  EXPECT_FALSE(lex.resolve("3"));
}
