#pragma once

#include <functional>
#include <vector>

#include "flyauto/automaton.hpp"
#include "flyauto/setterm.hpp"

namespace flyauto {

// Same automaton on a narrowed signature: occurrences rejected by `allowed`
// go to the Error sink. Pass a null predicate to only re-declare the
// signature descriptor.
FA restrict_sig(FA a, SigDesc sig, std::function<bool(const SymOcc&)> allowed);

// Componentwise product. States are tuples, one slot per part; parts run on
// the same signature. With collapse_error, a tuple that would contain an
// Error component becomes the global Error state (this keeps determinized
// state sets small in quantifier pipelines). out combines the parts'
// outputs; the Error state outputs false.
FA product(std::vector<FA> parts,
           std::function<StateValue(const std::vector<StateValue>&)> out_combine,
           bool collapse_error = false);

// Ready-made output combiners for acceptor products.
StateValue out_and(const std::vector<StateValue>& outs);
StateValue out_or(const std::vector<StateValue>& outs);

// Compose g onto the output function. g sees every root state's output,
// including false/Bot ones; it must preserve "no value" where that matters.
FA map_output(FA a, std::function<StateValue(const StateValue&)> g,
              std::string name = "");

// Complement of a deterministic acceptor. Every rejecting state becomes
// accepting, including the Error sink: Error marks an assignment that
// falsifies the atom, so its complement holds there.
FA negate(FA a);

// Image under a signature relabelling h with computable finite preimages:
// delta'(g, qs) = union of delta(f, qs) over f with h(f) = g. Generally
// nondeterministic.
FA image(FA a, SigDesc sig, std::function<std::vector<SymOcc>(const SymOcc&)> preimages,
         std::string name = "");

// Inverse image under an arity-preserving signature map: delta'(f, qs) =
// delta(h(f), qs). Preserves determinism.
FA inverse_image(FA a, SigDesc sig, std::function<SymOcc(const SymOcc&)> h,
                 std::string name = "");

// On-the-fly subset construction. States are the sorted sets of states the
// base automaton can reach; out_merge folds the outputs of the accepting
// members (default: accepts iff some member accepts).
FA determinize(FA a,
               std::function<StateValue(const std::vector<StateValue>&)> out_merge = {});

// Annotation projection pr: keep the first `keep` coordinates and guess the
// rest. Nondeterministic; typically wrapped in determinize().
FA pr_project(FA a, int keep);

// Substitution [X_j := S_j]: inverse image transforming each occurrence's
// annotation so that old bit j = S_j evaluated on the new bits. subs.size()
// must equal a's width; the result reads `new_width` coordinates.
FA subst_setterms(FA a, int new_width, std::vector<SetTermPtr> subs);

// Relativization to the sub-universe selected by the LAST annotation
// coordinate of the result: vertices outside it are treated as absent
// (their leaves read as the empty graph). The result has width a.width + 1
// and runs a (graph-mode) property of the induced subgraph.
FA relativize_last(FA a);

} // namespace flyauto
