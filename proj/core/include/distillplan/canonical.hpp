#pragma once

// Derived numbers in emitted documents are rounded to six significant
// digits before serialization so repeated runs produce byte-identical
// output. Inputs echoed back into a document are never rounded.

namespace distill {

double canonical_round(double v);

}  // namespace distill
