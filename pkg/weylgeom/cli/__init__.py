"""weylgeom command-line interface"""
