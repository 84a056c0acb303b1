#include <benchmark/benchmark.h>

#include "fondrec/dfa.hpp"
#include "fondrec/ltl.hpp"

using namespace fondrec;

static void BM_CompileEventually(benchmark::State &state) {
  FormulaPtr f = parse_formula("F(vAt(51))", Dialect::ltlf);
  for (auto _ : state) benchmark::DoNotOptimize(compile_to_dfa(f));
}
BENCHMARK(BM_CompileEventually);

static void BM_CompileOrderedChain(benchmark::State &state) {
  // Nested ordered-eventually chains of growing depth.
  std::string s = "F(a0)";
  for (int i = 1; i < state.range(0); ++i)
    s = "F(a" + std::to_string(i) + " & X(" + s + "))";
  FormulaPtr f = parse_formula(s, Dialect::ltlf);
  for (auto _ : state) benchmark::DoNotOptimize(compile_to_dfa(f));
}
BENCHMARK(BM_CompileOrderedChain)->DenseRange(1, 5);

static void BM_CompilePastSince(benchmark::State &state) {
  FormulaPtr f = parse_formula("a & (!b S c) & O(d)", Dialect::ppltl);
  for (auto _ : state) benchmark::DoNotOptimize(compile_to_dfa(f));
}
BENCHMARK(BM_CompilePastSince);

static void BM_DfaAccepts(benchmark::State &state) {
  FormulaPtr f = parse_formula("F(a & X(F b))", Dialect::ltlf);
  Dfa d = compile_to_dfa(f);
  Trace t;
  for (int i = 0; i < 64; ++i) {
    Step s;
    if (i == 30) s.insert("a");
    if (i == 60) s.insert("b");
    t.push_back(std::move(s));
  }
  for (auto _ : state) benchmark::DoNotOptimize(accepts(d, t));
}
BENCHMARK(BM_DfaAccepts);

BENCHMARK_MAIN();
