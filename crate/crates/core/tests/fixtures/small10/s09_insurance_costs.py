import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns

df = pd.read_csv('../input/insurance_costs.csv')

plt.figure(figsize=(8, 4))
sns.boxplot(x='target', y='age', data=df)
plt.xticks(rotation=45)
plt.show()

corr = df.corr(numeric_only=True)
print(corr['age'].sort_values())

sns.pairplot(df.sample(100))
plt.show()

num_cols = [c for c in df.columns if df[c].dtype != 'object']
print(num_cols)

fig, ax = plt.subplots(1, 2, figsize=(14, 5))
df['age'].plot(kind='hist', ax=ax[0])
df.boxplot(column='age', ax=ax[1])
plt.show()

plt.figure(figsize=(10, 6))
sns.heatmap(df.corr(), annot=True)
plt.title('Correlation')
plt.show()

missing = df.isnull().mean() * 100
missing = missing.sort_values(ascending=False)
print(missing.head(10))

df.hist(bins=30, figsize=(12, 8))
plt.tight_layout()
plt.show()

df['target'].value_counts()
sns.countplot(x='target', data=df)
plt.show()

print(df.shape)
df.head()
df.info()
df.describe()

df = df.dropna(subset=['target'])
df['sex'] = df['sex'].fillna(df['sex'].mode()[0])
df['smoker'] = df['smoker'].fillna(df['smoker'].mode()[0])
df['age'] = df['age'].fillna(df['age'].median())
df['bmi'] = df['bmi'].fillna(df['bmi'].median())
df['children'] = df['children'].fillna(df['children'].median())

grouped = df.groupby('target').mean(numeric_only=True)
print(grouped)
grouped.plot(kind='bar', figsize=(10, 5))
plt.show()
df.to_csv('insurance_costs_clean.csv', index=False)
