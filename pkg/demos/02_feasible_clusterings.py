# %% [markdown]
# # Consecutive clusterings
#
# Categories are put in an order (the natural order for ordinal
# predictors, the one-hot coefficients for nominal ones) and only clusters
# of neighbouring categories are allowed. With two clusters a predictor
# with K categories has exactly K candidates: a cut after each of the
# first K-1 categories, plus "everything together", which is the same as
# leaving the predictor out.

# %%
import numpy as np

from catcluster.clustering import enumerate_feasible_clusterings

education = ["1st-4th", "5th-6th", "7th-8th", "9th", "10th", "11th", "12th", "HS-grad", "Some-college",
             "Assoc-voc", "Assoc-acdm", "Prof-school", "Bachelors", "Masters", "Doctorate"]
table = 1 - np.array(enumerate_feasible_clusterings(len(education), 2)).T
for label, row in zip(education, table):
    print(f"{label:>13}  " + " ".join(map(str, row)))

# %% [markdown]
# More clusters give more candidates, one per way of placing up to K'-1
# cuts in the K-1 gaps.

# %%
for k_prime in (2, 3, 4):
    print(k_prime, [len(enumerate_feasible_clusterings(k, k_prime)) for k in range(2, 9)])
