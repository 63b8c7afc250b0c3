# rkl command implementations
