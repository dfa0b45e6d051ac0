#include <gtest/gtest.h>

#include <sstream>

#include "rris/lexicon.hpp"
#include "rris/text.hpp"

using namespace rris;

TEST(Text, NormalizeAndTokenize) {
    EXPECT_EQ(normalize_text("  The MAN's  t-shirt, on the LEFT!! "), "the mans tshirt on the left");
    EXPECT_EQ(tokenize("a,b  c"), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_TRUE(tokenize(" ,.; ").empty());
    EXPECT_EQ(join_words({"a", "b", "c"}, 1), "b c");
}

TEST(Catalog, CocoHasEightyCategoriesWithRealIds) {
    const auto& coco = CategoryCatalog::coco();
    EXPECT_EQ(coco.size(), 80u);
    EXPECT_EQ(coco.find(1)->name, "person");
    EXPECT_EQ(coco.find(90)->name, "toothbrush");
    EXPECT_EQ(coco.find(12), nullptr);  // gap in the COCO id space
}

TEST(Catalog, PhraseLookupWithSynonymsAndPlurals) {
    const auto& coco = CategoryCatalog::coco();
    EXPECT_EQ(coco.lookup_phrase("man"), 1);
    EXPECT_EQ(coco.lookup_phrase("women"), 1);
    EXPECT_EQ(coco.lookup_phrase("teddy bear"), 88);
    EXPECT_EQ(coco.lookup_phrase("traffic lights"), 10);
    EXPECT_EQ(coco.lookup_phrase("buses"), 6);
    EXPECT_FALSE(coco.lookup_phrase("hat").has_value());
    EXPECT_TRUE(coco.is_noun_word("light"));
    EXPECT_FALSE(coco.is_noun_word("traffic"));
}

TEST(Catalog, RejectsDuplicateIdsAndEmptyNames) {
    EXPECT_THROW(CategoryCatalog({{1, "cat", {}}, {1, "dog", {}}}), Error);
    EXPECT_THROW(CategoryCatalog({{1, " ", {}}}), Error);
    const CategoryCatalog c({{3, "cat", {"kitty"}}});
    EXPECT_EQ(catalog_from_json(to_json(c)).entries(), c.entries());
}

TEST(Lexicon, DefaultsAreConsistent) {
    const auto& lex = Lexicons::defaults();
    EXPECT_TRUE(lex.is_color("blue"));
    EXPECT_TRUE(lex.is_position("left"));
    EXPECT_TRUE(lex.is_vague("one"));
    EXPECT_TRUE(lex.is_vague("second"));
    EXPECT_TRUE(lex.nouns.count("hat"));
    EXPECT_FALSE(lex.nouns.count("left"));
    EXPECT_NO_THROW(lex.validate());
}

TEST(Lexicon, FileSectionsReplaceDefaults) {
    std::istringstream in("# custom colors only\n[colors]\nteal\nmauve  # comment\n");
    const Lexicons lex = parse_lexicon(in);
    EXPECT_EQ(lex.colors, (std::vector<std::string>{"teal", "mauve"}));
    EXPECT_EQ(lex.positions, Lexicons::defaults().positions);

    std::ostringstream out;
    write_lexicon(out, Lexicons::defaults());
    std::istringstream back(out.str());
    EXPECT_EQ(parse_lexicon(back), Lexicons::defaults());
}

TEST(Lexicon, MalformedFilesAreRejected) {
    std::istringstream stray("blue\n");
    EXPECT_THROW(parse_lexicon(stray), Error);
    std::istringstream unknown("[shapes]\nround\n");
    EXPECT_THROW(parse_lexicon(unknown), Error);
    std::istringstream overlap("[colors]\nleft\n");
    EXPECT_THROW(parse_lexicon(overlap), Error);
    std::istringstream emptied("[positions]\n");
    EXPECT_THROW(parse_lexicon(emptied), Error);
}

TEST(Lexicon, WithoutAbsolutePositionsKeepsRelativeOnes) {
    const Lexicons lex = Lexicons::defaults().without_absolute_positions();
    EXPECT_FALSE(lex.is_position("left"));
    EXPECT_FALSE(lex.is_position("top"));
    EXPECT_TRUE(lex.is_position("behind"));
    EXPECT_TRUE(lex.is_position("next"));
}
