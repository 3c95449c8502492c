#include "doctest.h"

#include <random>

#include "flyauto/parse.hpp"
#include "flyauto/pgraph.hpp"
#include "flyauto/term.hpp"
#include "oracle.hpp"

using namespace flyauto;

TEST_CASE("symbol constructors normalize and validate") {
    CHECK(Symbol::add_undir(2, 1).a == 1);
    CHECK(Symbol::add_undir(2, 1).b == 2);
    CHECK(Symbol::add_dir(2, 1).a == 2);
    CHECK_THROWS_AS(Symbol::add_undir(3, 3), std::invalid_argument);
    CHECK_THROWS_AS(Symbol::port(0), std::invalid_argument);
    CHECK_THROWS_AS(Symbol::relab_of({{1, 2}, {1, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(Symbol::relab_of({{2, 2}}), std::invalid_argument);
    CHECK(Symbol::relab_of({{3, 1}, {2, 1}}).relab ==
          std::vector<std::pair<int, int>>{{2, 1}, {3, 1}});
    CHECK(Symbol::relab1(1, 2).str() == "relab(1>2)");
    CHECK(Symbol::add_undir(2, 1).str() == "add(1,2)");
}

TEST_CASE("parse and render round trip") {
    const char* texts[] = {
        "empty",
        "3",
        "oplus(1,2)",
        "add(1,2,oplus(1,2))",
        "relab(2>1,add(1,2,oplus(1,2)))",
        "relab(1>3;2>3,oplus(1,2))",
        "add(1,2,oplus(1,add(1,2,oplus(2,1))))",
    };
    for (const char* s : texts) {
        Term t = parse_term(s);
        CHECK(render(t) == s);
        CHECK(term_eq(parse_term(render(t)), t));
    }
    Term d = parse_term("#mode directed\nadddir(2,1,oplus(1,2))");
    CHECK(d.directed);
    CHECK(render(d) == "#mode directed\nadddir(2,1,oplus(1,2))");

    Term a = parse_term("oplus(1[10],2[01])");
    CHECK(a.mode == AnnotMode::Graph);
    CHECK(a.width == 2);
    CHECK(a.root->kids[0]->bits == 1);
    CHECK(a.root->kids[1]->bits == 2);
    CHECK(render(a) == "oplus(1[10],2[01])");

    CHECK(term_eq(parse_term("  oplus ( 1 , \n 2 )  "), parse_term("oplus(1,2)")));
}

TEST_CASE("parse errors carry position") {
    CHECK_THROWS_AS(parse_term("oplus(1)"), ParseError);
    CHECK_THROWS_AS(parse_term("add(1,1,oplus(1,2))"), ParseError);
    CHECK_THROWS_AS(parse_term("adddir(1,2,oplus(1,2))"), ParseError);  // undirected mode
    CHECK_THROWS_AS(parse_term("#mode directed\nadd(1,2,oplus(1,2))"), ParseError);
    CHECK_THROWS_AS(parse_term("oplus(1,2) trailing"), ParseError);
    CHECK_THROWS_AS(parse_term("relab(1>1,oplus(1,2))"), ParseError);
    CHECK_THROWS_AS(parse_term("oplus(1[10],2[1])"), ParseError);  // width mismatch
    CHECK_THROWS_AS(parse_term("frob(1)"), ParseError);
    try {
        parse_term("oplus(1,\nfrob)");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.col == 1);
    }
}

TEST_CASE("evaluation of a fixed path term") {
    // Leaves in order: label 1, label 1, label 2; top add(1,2) joins both
    // 1-ports to the single 2-port.
    Term t = parse_term("add(1,2,oplus(1,oplus(1,2)))");
    PGraph g = eval_graph(t);
    CHECK(g.n() == 3);
    CHECK(g.m() == 2);
    CHECK(g.label == std::vector<int>{1, 1, 2});
    CHECK(g.has_edge(0, 2));
    CHECK(g.has_edge(1, 2));
    CHECK_FALSE(g.has_edge(0, 1));
    CHECK(g.verts[0].str() == "11");
    CHECK(g.verts[1].str() == "121");
    CHECK(g.verts[2].str() == "122");
}

TEST_CASE("directed adds only go one way") {
    Term t = parse_term("#mode directed\nadddir(2,1,oplus(1,2))");
    PGraph g = eval_graph(t);
    CHECK(g.m() == 1);
    CHECK(g.has_edge(1, 0));
    CHECK_FALSE(g.has_edge(0, 1));
}

TEST_CASE("eval_graph matches the independent evaluator on random terms") {
    std::mt19937 rng(20260819);
    for (int iter = 0; iter < 300; ++iter) {
        oracle::TermGen opts;
        opts.max_label = 1 + iter % 4;
        opts.directed = iter % 2 == 1;
        Term t = oracle::random_term(rng, 1 + iter % 9, opts);
        oracle::SimpleGraph a = oracle::naive_eval(t);
        oracle::SimpleGraph b = oracle::from_pgraph(eval_graph(t));
        CHECK(oracle::same_graph(a, b));
        CHECK(a.pos == b.pos);
    }
}

TEST_CASE("leaf positions are sorted and annotation round trips") {
    std::mt19937 rng(7);
    oracle::TermGen opts;
    for (int iter = 0; iter < 50; ++iter) {
        Term t = oracle::random_term(rng, 1 + iter % 7, opts);
        std::vector<Dewey> leaves = leaf_positions(t);
        CHECK(std::is_sorted(leaves.begin(), leaves.end()));

        std::set<Dewey> x1, x2;
        for (size_t i = 0; i < leaves.size(); ++i) {
            if (i % 2 == 0) x1.insert(leaves[i]);
            if (i % 3 == 0) x2.insert(leaves[i]);
        }
        Term at = annotate_vertex_sets(t, {x1, x2});
        CHECK(at.mode == AnnotMode::Graph);
        CHECK(at.width == 2);
        for (size_t i = 0; i < leaves.size(); ++i) {
            uint32_t want = (i % 2 == 0 ? 1u : 0u) | (i % 3 == 0 ? 2u : 0u);
            CHECK(node_at(at, leaves[i])->bits == want);
        }
        CHECK(term_eq(strip_annotations(at), t));
    }
}

TEST_CASE("term_stats on a fixed term") {
    Term t = parse_term("relab(2>1,add(1,2,oplus(1,oplus(2,1))))");
    TermStats s = term_stats(t);
    CHECK(s.nodes == 7);
    CHECK(s.ht == 5);
    CHECK(s.n_vertices == 3);
    CHECK(s.mu == std::set<int>{1, 2});
    CHECK(s.max_mu == 2);
    CHECK(s.pi == std::set<int>{1});  // final relab folds 2 into 1
    CHECK(s.max_pi == 1);
    // Tag byte + decimal digits per symbol: relab(2>1)=3, add(1,2)=3, two
    // oplus=1 each, three ports=2 each.
    CHECK(s.encoded == 14);
}

TEST_CASE("node_at and subterm address by position") {
    Term t = parse_term("add(1,2,oplus(1,oplus(2,3)))");
    CHECK(node_at(t, Dewey::root())->sym.kind == SymKind::AddUndir);
    CHECK(node_at(t, Dewey{{1, 2, 1}})->sym.a == 2);
    Term sub = subterm(t, Dewey{{1, 2}});
    CHECK(render(sub) == "oplus(2,3)");
    CHECK_THROWS_AS(node_at(t, Dewey{{2}}), std::out_of_range);
}

TEST_CASE("trivial term reproduces the input graph") {
    std::mt19937 rng(42);
    for (int iter = 0; iter < 60; ++iter) {
        bool directed = iter % 2 == 1;
        oracle::SimpleGraph g = oracle::random_graph(rng, 1 + iter % 10, 0.4, directed);
        if (iter % 3 == 0)
            for (int v = 0; v < g.n; ++v) g.label[v] = 1 + (v * 7) % 3;
        PGraph pg = oracle::to_pgraph(g);
        Term t = trivial_term(pg);
        oracle::SimpleGraph back = oracle::from_pgraph(eval_graph(t));
        back.pos.clear();
        oracle::SimpleGraph want = g;
        want.pos.clear();
        CHECK(oracle::same_graph(back, want));
        // Independent evaluator agrees too.
        oracle::SimpleGraph back2 = oracle::naive_eval(t);
        back2.pos.clear();
        CHECK(oracle::same_graph(back2, want));
    }
    CHECK(node_count(trivial_term(parse_edge_list("0 0 0"))) == 1);
}

TEST_CASE("edge list parsing and rendering") {
    PGraph g = parse_edge_list("3 2 0\n1 2\n2 3\np 3 5\n");
    CHECK(g.n() == 3);
    CHECK(g.m() == 2);
    CHECK_FALSE(g.directed);
    CHECK(g.label == std::vector<int>{1, 1, 5});
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(2, 1));
    CHECK(render_edge_list(g) == "3 2 0\n1 2\n2 3\np 3 5\n");

    PGraph d = parse_edge_list("2 1 1\n2 1\n");
    CHECK(d.directed);
    CHECK(d.has_edge(1, 0));
    CHECK_FALSE(d.has_edge(0, 1));

    CHECK_THROWS(parse_edge_list(""));
    CHECK_THROWS(parse_edge_list("2 1 0\n"));          // missing edge
    CHECK_THROWS(parse_edge_list("2 1 0\n1 1\n"));     // loop
    CHECK_THROWS(parse_edge_list("2 1 0\n1 3\n"));     // out of range
    CHECK_THROWS(parse_edge_list("2 1 2\n1 2\n"));     // bad directed flag
    CHECK_THROWS(parse_edge_list("# comment only\n"));

    // Comments and blank lines are tolerated.
    PGraph c = parse_edge_list("# triangle\n3 3 0\n1 2\n2 3 # last\n\n1 3\n");
    CHECK(c.m() == 3);
}

TEST_CASE("graph labels follow relabelling") {
    Term t = parse_term("relab(1>3,oplus(1,2))");
    CHECK(graph_labels_of(t) == std::set<int>{2, 3});
    CHECK(labels_occurring(t) == std::set<int>{1, 2, 3});
}
