# Time units are arbitrary but shared: a Rate or Frequency is per unit Time.


class Time(float):
    def __str__(self):
        return f"{self:.4g}"


# inverse time, e.g. kappa and gamma of a kernel
class Rate(float):
    def __str__(self):
        return f"{self:.4g}"


# angular frequency of a Hamiltonian or bath mode
class Frequency(float):
    def __str__(self):
        return f"{self:.4g}"


# Dimensionless
class Ratio(float):
    def __str__(self):
        return f"{self:.3f}"


# Dimensionless
class Count(int):
    pass
