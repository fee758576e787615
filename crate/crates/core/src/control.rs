//! Time-optimal control of the food supply via multiple shooting.
