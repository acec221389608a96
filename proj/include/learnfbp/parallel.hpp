#pragma once

namespace learnfbp {

/// Worker count used by the projector and evaluation loops.
int thread_count();
void set_thread_count(int n);

} // namespace learnfbp
