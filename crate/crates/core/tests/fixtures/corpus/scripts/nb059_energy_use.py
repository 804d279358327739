import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
import warnings
warnings.filterwarnings('ignore')

df = pd.read_csv('energy_use.csv')

df.isnull().sum()
print(df.dtypes)
df.nunique()

fig, ax = plt.subplots(1, 2, figsize=(14, 5))
df['surface'].plot(kind='hist', ax=ax[0])
df.boxplot(column='surface', ax=ax[1])
plt.show()

sns.pairplot(df.sample(100))
plt.show()

corr = df.corr(numeric_only=True)
print(corr['surface'].sort_values())

df.hist(bins=30, figsize=(12, 8))
plt.tight_layout()
plt.show()

print(df.shape)
df.head()
df.info()
df.describe()

df['target'].value_counts()
sns.countplot(x='target', data=df)
plt.show()

plt.figure(figsize=(8, 4))
sns.boxplot(x='target', y='surface', data=df)
plt.xticks(rotation=45)
plt.show()

df = df.dropna(subset=['target'])
df['orientation'] = df['orientation'].fillna(df['orientation'].mode()[0])
df['surface'] = df['surface'].fillna(df['surface'].median())
df['wall_area'] = df['wall_area'].fillna(df['wall_area'].median())
df['roof_area'] = df['roof_area'].fillna(df['roof_area'].median())

grouped = df.groupby('target').mean(numeric_only=True)
print(grouped)
grouped.plot(kind='bar', figsize=(10, 5))
plt.show()
df.to_csv('energy_use_clean.csv', index=False)
