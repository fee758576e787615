//! Bifurcation curves, region atlas and cusp scans.
